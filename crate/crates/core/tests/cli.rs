use std::path::Path;
use std::process::{Command, Output};

fn revrank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_revrank"))
        .args(args)
        .output()
        .unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const HEADER: &str = "review_title,review_positive,review_negative,review_score,review_helpful_votes,guest_type,guest_country,room_nights,month,accommodation_id,accommodation_type,accommodation_score,accommodation_country,accommodation_star_rating,location_is_beach,location_is_ski,location_is_city_center";

#[test]
fn ingest_strict_names_the_offending_column() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    let header_without_month = HEADER.replace(",month", "");
    std::fs::write(
        &csv,
        format!("{header_without_month}\nA,B,,8,0,Couple,Peru,2,h1,Hotel,8,Peru,3,0,0,1\n"),
    )
    .unwrap();
    let out = revrank(&[
        "ingest",
        "--input",
        p(&csv),
        "--report",
        p(&dir.path().join("r.txt")),
        "--strict",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("month"), "{}", text(&out.stderr));
}

#[test]
fn ingest_lenient_reports_rejections() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("mixed.csv");
    let mut body = String::from(HEADER);
    body.push('\n');
    for i in 0..10 {
        body.push_str(&format!(
            "T{i},Good,,8,{},Couple,Peru,2,July,h1,Hotel,8,Peru,3,0,0,1\n",
            i % 2
        ));
    }
    body.push_str("Bad,Row,,8,0,Astronaut,Peru,2,July,h1,Hotel,8,Peru,3,0,0,1\n");
    std::fs::write(&csv, body).unwrap();
    let report = dir.path().join("report.txt");
    let out = revrank(&["ingest", "--input", p(&csv), "--report", p(&report)]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let r = std::fs::read_to_string(&report).unwrap();
    assert!(r.contains("records = 10\n"));
    assert!(r.contains("voted_fraction = 0.5\n"));
    assert!(r.contains("rejections = 1\n"));
    assert!(
        r.contains("rejected.11 = ") && r.contains("guest_type"),
        "{r}"
    );

    let strict = revrank(&[
        "ingest",
        "--input",
        p(&csv),
        "--report",
        p(&report),
        "--strict",
    ]);
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn exit_codes_for_usage_and_io_failures() {
    assert_eq!(revrank(&["train"]).status.code(), Some(1));
    assert_eq!(revrank(&["--help"]).status.code(), Some(0));
    let missing = revrank(&[
        "ingest",
        "--input",
        "/no/such/file.csv",
        "--report",
        "/tmp/unused_report.txt",
    ]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn end_to_end_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let (data, ckpt) = (dir.path().join("data"), dir.path().join("ckpt"));
    let gen = revrank(&[
        "gen-synthetic",
        "--out",
        p(&data),
        "--n-accommodations",
        "60",
        "--seed",
        "2",
    ]);
    assert_eq!(gen.status.code(), Some(0), "{}", text(&gen.stderr));
    for f in [
        "train.csv",
        "validation.csv",
        "test.csv",
        "synth_config.txt",
    ] {
        assert!(data.join(f).exists(), "{f}");
    }

    let config = dir.path().join("train.txt");
    std::fs::write(
        &config,
        "# overrides\nepochs = 2\ndim = 16\ntoken_dim = 16\n",
    )
    .unwrap();
    let train = revrank(&[
        "train",
        "--data",
        p(&data),
        "--out",
        p(&ckpt),
        "--preset",
        "desk",
        "--config",
        p(&config),
        "--batch-size",
        "8",
    ]);
    assert_eq!(train.status.code(), Some(0), "{}", text(&train.stderr));
    let echoed = text(&train.stdout);
    assert!(
        echoed.contains("epochs = 2\n")
            && echoed.contains("batch_size = 8\n")
            && echoed.contains("learning_rate = 0.01\n")
    );
    for f in [
        "final.ckpt",
        "best.ckpt",
        "vocab.txt",
        "config.txt",
        "train_log.tsv",
    ] {
        assert!(ckpt.join(f).exists(), "{f}");
    }

    let report = dir.path().join("eval.tsv");
    let eval = revrank(&[
        "evaluate",
        "--checkpoint",
        p(&ckpt),
        "--data",
        p(&data.join("test.csv")),
        "--out",
        p(&report),
        "--methods",
        &format!("votes,model,final={}", p(&ckpt.join("final.ckpt"))),
    ]);
    assert_eq!(eval.status.code(), Some(0), "{}", text(&eval.stderr));
    let tsv = std::fs::read_to_string(&report).unwrap();
    let names: Vec<&str> = tsv
        .lines()
        .skip(1)
        .take(3)
        .map(|l| l.split('\t').next().unwrap())
        .collect();
    assert_eq!(names, ["votes", "model", "final"]);
    assert!(tsv.contains("# friedman"));

    let one = dir.path().join("one.csv");
    let test_csv = std::fs::read_to_string(data.join("test.csv")).unwrap();
    let mut lines = test_csv.lines();
    let header = lines.next().unwrap();
    let first = lines.next().unwrap();
    let acc = first.split(',').nth(9).unwrap().to_string();
    let mut body = format!("{header}\n{first}\n");
    for l in lines.filter(|l| l.split(',').nth(9) == Some(acc.as_str())) {
        body.push_str(l);
        body.push('\n');
    }
    std::fs::write(&one, body).unwrap();
    let rank = revrank(&[
        "rank",
        "--checkpoint",
        p(&ckpt),
        "--reviews",
        p(&one),
        "--top",
        "3",
        "--context",
        "guest_type=couple",
        "--context",
        "room_nights=2",
        "--context",
        "month=Aug",
    ]);
    assert_eq!(rank.status.code(), Some(0), "{}", text(&rank.stderr));
    let ranked = text(&rank.stdout);
    assert_eq!(ranked.lines().count(), 4);
    let logits: Vec<f64> = ranked
        .lines()
        .skip(1)
        .map(|l| l.split('\t').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(logits.windows(2).all(|w| w[0] >= w[1]));

    let mixed = revrank(&[
        "rank",
        "--checkpoint",
        p(&ckpt),
        "--reviews",
        p(&data.join("test.csv")),
        "--context",
        "guest_type=couple",
        "--context",
        "room_nights=2",
        "--context",
        "month=Aug",
    ]);
    assert_eq!(mixed.status.code(), Some(1));
    let unknown = revrank(&[
        "rank",
        "--checkpoint",
        p(&ckpt),
        "--reviews",
        p(&one),
        "--context",
        "guest_type=couple",
        "--context",
        "room_nights=2",
        "--context",
        "month=Aug",
        "--context",
        "mood=ok",
    ]);
    assert_eq!(unknown.status.code(), Some(1));

    let lexicon = dir.path().join("lexicon.txt");
    std::fs::write(
        &lexicon,
        "work: laptop, desk\nromance: romantic, moonlight\n",
    )
    .unwrap();
    let compare = revrank(&[
        "compare",
        "--checkpoint",
        p(&ckpt),
        "--baseline-checkpoint",
        "untrained",
        "--data",
        p(&data.join("test.csv")),
        "--lexicon",
        p(&lexicon),
        "--samples",
        "4",
        "--stratify",
    ]);
    assert_eq!(compare.status.code(), Some(0), "{}", text(&compare.stderr));
    assert!(text(&compare.stdout).starts_with("accommodation_id\tguest_type\t"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.txt");
    std::fs::write(&config, "learning_rat = 0.1\n").unwrap();
    let out = revrank(&[
        "train",
        "--data",
        p(dir.path()),
        "--out",
        p(&dir.path().join("o")),
        "--config",
        p(&config),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("learning_rat"));
}
