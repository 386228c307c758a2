//! Trains the four sampler/loss variants on a synthetic corpus and compares
//! them with the helpful-votes and untrained baselines on the test split.

use std::time::Instant;

use revrank::contrastive::LossKind;
use revrank::dataset::{group_by_accommodation, split_dataset, DEFAULT_SPLIT};
use revrank::eval::{evaluate, rankable, Method};
use revrank::sampling::SamplerKind;
use revrank::synthgen::{generate, oracle_mrr, random_expectation, SynthConfig};
use revrank::trainer::{train, Preset, TrainConfig};

fn main() -> revrank::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(7);
    let synth = SynthConfig {
        seed,
        ..SynthConfig::default()
    };
    let groups = group_by_accommodation(generate(&synth)?)?;
    let split = split_dataset(groups, DEFAULT_SPLIT, seed)?;
    let test = rankable(&split.test);
    println!("ideal scorer MRR {:.4}", oracle_mrr(&test, &synth));
    println!("random expectation {:.4}", random_expectation(&test));

    let mut models = Vec::new();
    for sampler in [SamplerKind::Random, SamplerKind::InAccommodation] {
        for loss in [LossKind::InfoNce, LossKind::Bce] {
            let config = TrainConfig {
                sampler,
                loss,
                seed,
                ..TrainConfig::preset(Preset::Desk)
            };
            let started = Instant::now();
            let outcome = train(&split.train, &split.valid, &config)?;
            println!(
                "{} / {}: best epoch {}, {:.1}s\n{}",
                sampler.name(),
                loss.name(),
                outcome.best_epoch,
                started.elapsed().as_secs_f64(),
                outcome.log.to_tsv()
            );
            models.push((
                format!("{}+{}", sampler.name(), loss.name()),
                outcome.best_model,
            ));
        }
    }
    let untrained = models[0].1.untrained()?;
    let mut methods = vec![
        ("votes", Method::HelpfulVotes),
        ("untrained", Method::Model(&untrained)),
    ];
    methods.extend(models.iter().map(|(n, m)| (n.as_str(), Method::Model(m))));
    print!("{}", evaluate(&test, &methods)?.to_tsv());
    Ok(())
}
