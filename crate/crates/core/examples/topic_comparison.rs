//! Topic overlap between original reviews and the top picks of a trained
//! model and its untrained initialization, tagged with a keyword lexicon.

use revrank::dataset::{group_by_accommodation, split_dataset, DEFAULT_SPLIT};
use revrank::eval::{
    rankable, sample_contexts, topic_overlap_report, topic_table, Lexicon, Method,
};
use revrank::synthgen::{generate, SynthConfig};
use revrank::trainer::{train, Preset, TrainConfig};

fn main() -> revrank::Result<()> {
    let synth = SynthConfig::default();
    let split = split_dataset(group_by_accommodation(generate(&synth)?)?, DEFAULT_SPLIT, 0)?;
    let model = train(
        &split.train,
        &split.valid,
        &TrainConfig::preset(Preset::Desk),
    )?
    .best_model;
    let baseline = model.untrained()?;

    let lexicon = Lexicon::parse(
        "families: toddler, playground, stroller, babysitter, crib\n\
         romance: romantic, honeymoon, anniversary, champagne, moonlight\n\
         nightlife: party, brewery, dancing, crowd, games\n\
         work: laptop, desk, cowork, wifi, podcast\n",
    )?;
    let test = rankable(&split.test);
    let samples = sample_contexts(&test, 8, true, 1);
    let rows = topic_overlap_report(
        &samples,
        &Method::Model(&model).rank_all(&test)?,
        &Method::Model(&baseline).rank_all(&test)?,
        &test,
        &lexicon,
    )?;
    for line in topic_table(&rows).lines() {
        let cols: Vec<&str> = line.split('\t').collect();
        println!("{}\t{}\t{}\t{}", cols[1], cols[5], cols[6], cols[7]);
    }
    let total = |f: fn(&revrank::eval::TopicComparison) -> usize| rows.iter().map(f).sum::<usize>();
    println!(
        "shared topics with the original: model {}, untrained {}",
        total(|r| r.model_overlap.len()),
        total(|r| r.baseline_overlap.len())
    );
    Ok(())
}
