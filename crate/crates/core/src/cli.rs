//! Command-line front end. Exit codes: 0 success, 1 validation or domain
//! failure (including bad flags), 2 I/O failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::contrastive::{clamp_logit, sigmoid, LossKind};
use crate::dataset::{
    group_by_accommodation, load_csv, split_dataset, validate_statistics, write_csv,
    AccommodationGroup, GuestContext, SchemaMode,
};
use crate::encoder::{load_checkpoint, DualEncoder};
use crate::error::{Error, Result};
use crate::eval::{
    evaluate, rankable, sample_contexts, topic_overlap_report, topic_table, Lexicon, Method,
};
use crate::sampling::SamplerKind;
use crate::synthgen::{generate, oracle_mrr, SynthConfig};
use crate::textualize::{serialize_context, serialize_review};
use crate::trainer::{
    train, write_training_outputs, Preset, TrainConfig, BEST_CHECKPOINT, VOCAB_FILE,
};

pub const TRAIN_CSV: &str = "train.csv";
pub const VALIDATION_CSV: &str = "validation.csv";
pub const TEST_CSV: &str = "test.csv";
pub const SYNTH_CONFIG: &str = "synth_config.txt";

#[derive(Debug, Parser)]
#[command(
    name = "revrank",
    version,
    about = "Context-aware review ranking with contrastive dual encoders"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a review CSV and write its statistics report.
    Ingest(IngestArgs),
    /// Generate a synthetic corpus with a planted guest-type signal.
    GenSynthetic(GenArgs),
    /// Train a dual encoder and write a checkpoint directory.
    Train(TrainArgs),
    /// Evaluate ranking methods on held-out accommodations.
    Evaluate(EvaluateArgs),
    /// Rank one accommodation's reviews for a guest context.
    Rank(RankArgs),
    /// Compare the topics of two models' top reviews with the original review.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Key-value report: statistics, then one `rejected.<row>` line per skipped
    /// row, counting data rows from 1 (the header is not counted).
    #[arg(long)]
    pub report: PathBuf,
    /// Abort on the first invalid row or unexpected column.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Output directory for train.csv, validation.csv, test.csv and synth_config.txt.
    #[arg(long)]
    pub out: PathBuf,
    /// Key-value file with SynthConfig fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub signal_strength: Option<f64>,
    #[arg(long)]
    pub n_accommodations: Option<usize>,
    /// Inclusive range such as `10..30`, or a single count.
    #[arg(long)]
    pub reviews_per_accommodation: Option<String>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// A directory with train.csv (and optionally validation.csv), or one CSV
    /// that is split 90/10 into train and validation by seed.
    #[arg(long)]
    pub data: PathBuf,
    /// Checkpoint directory to create.
    #[arg(long)]
    pub out: PathBuf,
    /// `paper` or `desk`; applied before the config file and flags.
    #[arg(long)]
    pub preset: Option<Preset>,
    /// Key-value file with TrainConfig fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    #[arg(long)]
    pub warmup_fraction: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// `infonce` or `bce`.
    #[arg(long)]
    pub loss: Option<LossKind>,
    /// `random` or `in-accommodation`.
    #[arg(long)]
    pub sampler: Option<SamplerKind>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Any config key, as `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Checkpoint directory (its best.ckpt is used) or checkpoint file.
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Comma-separated, reported in this order: `votes`, `untrained`,
    /// `model`, or `label=checkpoint` for further models.
    #[arg(long, default_value = "votes,untrained,model")]
    pub methods: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Guest context field as `key=value`; guest_type, room_nights and month
    /// are required, guest_country is optional.
    #[arg(long = "context", value_name = "KEY=VALUE", required = true)]
    pub context: Vec<String>,
    /// CSV of reviews from a single accommodation.
    #[arg(long)]
    pub reviews: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Checkpoint of the baseline model, or `untrained` for the model's own
    /// initialization.
    #[arg(long)]
    pub baseline_checkpoint: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Lines of `topic: keyword, keyword, ...`.
    #[arg(long)]
    pub lexicon: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub samples: usize,
    /// Draw samples/4 contexts per guest type.
    #[arg(long)]
    pub stratify: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the table here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Normal output goes to `out`, diagnostics to `err`.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match run(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Ingest(a) => ingest(a, out),
        Command::GenSynthetic(a) => gen_synthetic(a, out),
        Command::Train(a) => train_cmd(a, out),
        Command::Evaluate(a) => evaluate_cmd(a, out),
        Command::Rank(a) => rank_cmd(a, out),
        Command::Compare(a) => compare_cmd(a, out, err),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn ingest(a: IngestArgs, out: &mut dyn Write) -> Result<i32> {
    let mode = if a.strict {
        SchemaMode::Strict
    } else {
        SchemaMode::Lenient
    };
    let loaded = load_csv(&a.input, mode)?;
    if loaded.records.is_empty() {
        return Err(Error::Empty(format!(
            "{} has no valid records",
            a.input.display()
        )));
    }
    let stats = validate_statistics(&loaded.records)?;
    let mut report = stats.to_key_values();
    report.push_str(&format!("rejections = {}\n", loaded.rejections.len()));
    for r in &loaded.rejections {
        report.push_str(&format!("rejected.{} = {}\n", r.row, r.reason));
    }
    write_file(&a.report, &report)?;
    emit(out, &stats.to_table())?;
    emit(
        out,
        &format!("rejected rows: {}\n", loaded.rejections.len()),
    )?;
    Ok(0)
}

fn gen_synthetic(a: GenArgs, out: &mut dyn Write) -> Result<i32> {
    let mut config = match &a.config {
        Some(path) => SynthConfig::from_file(path, SynthConfig::default())?,
        None => SynthConfig::default(),
    };
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(s) = a.signal_strength {
        config.signal_strength = s;
    }
    if let Some(n) = a.n_accommodations {
        config.n_accommodations = n;
    }
    if let Some(r) = &a.reviews_per_accommodation {
        config.set("reviews_per_accommodation", r)?;
    }
    let groups = group_by_accommodation(generate(&config)?)?;
    let split = split_dataset(groups, crate::dataset::DEFAULT_SPLIT, config.seed)?;
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    for (name, part) in [
        (TRAIN_CSV, &split.train),
        (VALIDATION_CSV, &split.valid),
        (TEST_CSV, &split.test),
    ] {
        write_csv(a.out.join(name), &crate::dataset::flatten_groups(part))?;
    }
    write_file(&a.out.join(SYNTH_CONFIG), &config.to_key_values())?;
    let count = |g: &[AccommodationGroup]| g.iter().map(|g| g.len()).sum::<usize>();
    emit(
        out,
        &format!(
            "train {} / validation {} / test {} records\nideal scorer test MRR {:.6}\n",
            count(&split.train),
            count(&split.valid),
            count(&split.test),
            oracle_mrr(&split.test, &config)
        ),
    )?;
    Ok(0)
}

fn load_groups(path: &Path) -> Result<Vec<AccommodationGroup>> {
    group_by_accommodation(load_csv(path, SchemaMode::Strict)?.records)
}

fn train_config(a: &TrainArgs) -> Result<TrainConfig> {
    let mut config = TrainConfig::preset(a.preset.unwrap_or(Preset::Paper));
    if let Some(path) = &a.config {
        config = TrainConfig::from_file(path, config)?;
    }
    let flags: [(&str, Option<String>); 8] = [
        ("learning_rate", a.learning_rate.map(|v| v.to_string())),
        ("weight_decay", a.weight_decay.map(|v| v.to_string())),
        ("warmup_fraction", a.warmup_fraction.map(|v| v.to_string())),
        ("epochs", a.epochs.map(|v| v.to_string())),
        ("batch_size", a.batch_size.map(|v| v.to_string())),
        ("loss", a.loss.map(|v| v.name().to_string())),
        ("sampler", a.sampler.map(|v| v.name().to_string())),
        ("seed", a.seed.map(|v| v.to_string())),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            config.set(key, &v)?;
        }
    }
    for o in &a.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects key=value, got `{o}`")))?;
        config.set(k.trim(), v.trim())?;
    }
    config.validate()?;
    Ok(config)
}

fn train_cmd(a: TrainArgs, out: &mut dyn Write) -> Result<i32> {
    let config = train_config(&a)?;
    let (train_groups, valid_groups) = if a.data.is_dir() {
        let valid_path = a.data.join(VALIDATION_CSV);
        let valid = if valid_path.exists() {
            load_groups(&valid_path)?
        } else {
            Vec::new()
        };
        (load_groups(&a.data.join(TRAIN_CSV))?, valid)
    } else {
        let split = split_dataset(load_groups(&a.data)?, (0.9, 0.1, 0.0), config.seed)?;
        (split.train, split.valid)
    };
    emit(out, &config.to_key_values())?;
    let outcome = train(&train_groups, &valid_groups, &config)?;
    write_training_outputs(&a.out, &outcome, &config)?;
    emit(out, &outcome.log.to_tsv())?;
    emit(
        out,
        &format!(
            "best epoch {} written to {}\n",
            outcome.best_epoch,
            a.out.join(BEST_CHECKPOINT).display()
        ),
    )?;
    Ok(0)
}

/// Loads a checkpoint file, or the best checkpoint of a training directory.
/// A directory's vocabulary file must match the checkpoint's vocabulary.
pub fn load_model(path: &Path) -> Result<DualEncoder> {
    if !path.is_dir() {
        return load_checkpoint(path);
    }
    let model = load_checkpoint(path.join(BEST_CHECKPOINT))?;
    let vocab_path = path.join(VOCAB_FILE);
    if vocab_path.exists() {
        let text = std::fs::read_to_string(&vocab_path).map_err(|e| Error::io(&vocab_path, e))?;
        if !text
            .lines()
            .eq(model.vocab.tokens().iter().map(String::as_str))
        {
            return Err(Error::Checkpoint(format!(
                "{} does not match the vocabulary stored in {}",
                vocab_path.display(),
                BEST_CHECKPOINT
            )));
        }
    }
    Ok(model)
}

fn evaluate_cmd(a: EvaluateArgs, out: &mut dyn Write) -> Result<i32> {
    let model = load_model(&a.checkpoint)?;
    let untrained = model.untrained()?;
    let groups = rankable(&load_groups(&a.data)?);
    let specs = crate::config::parse_list(&a.methods);
    if specs.is_empty() {
        return Err(Error::Config("--methods lists no method".into()));
    }
    let mut extra: Vec<(String, DualEncoder)> = Vec::new();
    for s in &specs {
        if let Some((label, path)) = s.split_once('=') {
            extra.push((
                label.trim().to_string(),
                load_model(Path::new(path.trim()))?,
            ));
        }
    }
    let mut methods: Vec<(&str, Method<'_>)> = Vec::new();
    let mut extra_iter = extra.iter();
    for s in &specs {
        let entry = match s.as_str() {
            "votes" => ("votes", Method::HelpfulVotes),
            "untrained" => ("untrained", Method::Model(&untrained)),
            "model" => ("model", Method::Model(&model)),
            s if s.contains('=') => {
                let (label, m) = extra_iter
                    .next()
                    .expect("one loaded model per labelled method");
                (label.as_str(), Method::Model(m))
            }
            other => {
                return Err(Error::Config(format!(
                "unknown method `{other}` (expected votes, untrained, model or label=checkpoint)"
            )))
            }
        };
        methods.push(entry);
    }
    let report = evaluate(&groups, &methods)?;
    let tsv = report.to_tsv();
    write_file(&a.out, &tsv)?;
    emit(out, &tsv)?;
    Ok(0)
}

fn guest_from_pairs(pairs: &[String]) -> Result<GuestContext> {
    let (mut guest_type, mut nights, mut month, mut country) = (None, None, None, String::new());
    for p in pairs {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--context expects key=value, got `{p}`")))?;
        let v = v.trim();
        match k.trim() {
            "guest_type" => guest_type = Some(v.parse()?),
            "room_nights" => nights = Some(crate::config::parse_value::<u32>("room_nights", v)?),
            "month" => month = Some(v.parse()?),
            "guest_country" => country = v.to_string(),
            other => return Err(Error::UnknownKey(other.to_string())),
        }
    }
    let missing = |k: &str| Error::MissingColumn(format!("--context {k}=..."));
    let guest = GuestContext {
        guest_type: guest_type.ok_or_else(|| missing("guest_type"))?,
        guest_country: country,
        room_nights: nights.ok_or_else(|| missing("room_nights"))?,
        month: month.ok_or_else(|| missing("month"))?,
    };
    guest.validate()?;
    Ok(guest)
}

fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn rank_cmd(a: RankArgs, out: &mut dyn Write) -> Result<i32> {
    let model = load_model(&a.checkpoint)?;
    let guest = guest_from_pairs(&a.context)?;
    let records = load_csv(&a.reviews, SchemaMode::Strict)?.records;
    let first = records
        .first()
        .ok_or_else(|| Error::Empty(format!("{} has no reviews", a.reviews.display())))?;
    if let Some(other) = records
        .iter()
        .find(|r| r.accommodation_id() != first.accommodation_id())
    {
        return Err(Error::InvalidValue {
            field: "accommodation_id".into(),
            reason: format!(
                "reviews must share one accommodation, found `{}` and `{}`",
                first.accommodation_id(),
                other.accommodation_id()
            ),
        });
    }
    let context = model.encode_context(&serialize_context(&guest, &first.accommodation))?;
    let mut scored = records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            Ok((
                i,
                context.dot(&model.encode_review(&serialize_review(&r.review))?),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    let mut text = String::from("rank\tscore\tlogit\trecord\treview\n");
    for (rank, (i, logit)) in scored.iter().take(a.top).enumerate() {
        text.push_str(&format!(
            "{}\t{:.8}\t{:.6}\t{}\t{}\n",
            rank + 1,
            sigmoid(clamp_logit(*logit)),
            logit,
            i,
            one_line(&records[*i].review.text())
        ));
    }
    emit(out, &text)?;
    Ok(0)
}

fn compare_cmd(a: CompareArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let model = load_model(&a.checkpoint)?;
    let baseline = if a.baseline_checkpoint.as_os_str() == "untrained" {
        model.untrained()?
    } else {
        load_model(&a.baseline_checkpoint)?
    };
    let lexicon = Lexicon::load(&a.lexicon)?;
    let groups = rankable(&load_groups(&a.data)?);
    let samples = sample_contexts(&groups, a.samples, a.stratify, a.seed);
    if samples.len() < a.samples {
        let _ = writeln!(
            err,
            "warning: only {} of {} requested contexts available",
            samples.len(),
            a.samples
        );
    }
    let rows = topic_overlap_report(
        &samples,
        &Method::Model(&model).rank_all(&groups)?,
        &Method::Model(&baseline).rank_all(&groups)?,
        &groups,
        &lexicon,
    )?;
    let table = topic_table(&rows);
    match &a.out {
        Some(path) => write_file(path, &table)?,
        None => emit(out, &table)?,
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with_args(
            std::iter::once("revrank").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn unknown_flags_and_missing_required_flags_fail() {
        assert_eq!(run_args(&["ingest", "--input", "x.csv"]).0, 1);
        assert_eq!(
            run_args(&["ingest", "--input", "x", "--report", "y", "--bogus"]).0,
            1
        );
        assert_eq!(run_args(&["frobnicate"]).0, 1);
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, 0);
        for sub in [
            "ingest",
            "gen-synthetic",
            "train",
            "evaluate",
            "rank",
            "compare",
        ] {
            assert!(out.contains(sub), "{sub}");
        }
    }

    #[test]
    fn unreadable_input_is_io_failure() {
        let dir = tempfile::tempdir().unwrap();
        let report = dir.path().join("r.txt");
        let (code, _, err) = run_args(&[
            "ingest",
            "--input",
            "/nonexistent/reviews.csv",
            "--report",
            report.to_str().unwrap(),
        ]);
        assert_eq!(code, 2, "{err}");
    }

    #[test]
    fn context_pairs() {
        let ok = guest_from_pairs(&[
            "guest_type=couple".into(),
            "room_nights=3".into(),
            "month=Jul".into(),
        ])
        .unwrap();
        assert_eq!(ok.room_nights, 3);
        assert!(guest_from_pairs(&["guest_type=couple".into(), "month=July".into()]).is_err());
        assert!(matches!(
            guest_from_pairs(&["mood=happy".into()]),
            Err(Error::UnknownKey(k)) if k == "mood"
        ));
    }

    #[test]
    fn preset_flags_and_overrides() {
        let args = |extra: &[&str]| {
            let mut v = vec!["revrank", "train", "--data", "d", "--out", "o"];
            v.extend_from_slice(extra);
            match Cli::try_parse_from(v).unwrap().command {
                Command::Train(a) => train_config(&a),
                _ => unreachable!(),
            }
        };
        let paper = args(&["--preset", "paper"]).unwrap();
        assert_eq!(
            (paper.learning_rate, paper.batch_size, paper.epochs),
            (3e-5, 64, 4)
        );
        let c = args(&[
            "--preset",
            "desk",
            "--loss",
            "bce",
            "--sampler",
            "in-accommodation",
            "--set",
            "dim=32",
        ])
        .unwrap();
        assert_eq!((c.learning_rate, c.dim), (1e-2, 32));
        assert!(c
            .to_key_values()
            .contains("loss = bce\nsampler = in-accommodation\n"));
        assert!(matches!(
            args(&["--set", "speed=9"]),
            Err(Error::UnknownKey(_))
        ));
        assert!(args(&["--batch-size", "1"]).is_err());
    }
}
