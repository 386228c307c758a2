//! Trains briefly, round-trips the model through a checkpoint file and ranks
//! one accommodation's reviews for each guest type.

use revrank::dataset::{group_by_accommodation, split_dataset, GuestType, DEFAULT_SPLIT};
use revrank::encoder::{load_checkpoint, save_checkpoint};
use revrank::synthgen::{generate, SynthConfig};
use revrank::textualize::{serialize_context, serialize_review};
use revrank::trainer::{train, Preset, TrainConfig};

fn main() -> revrank::Result<()> {
    let synth = SynthConfig::default();
    let split = split_dataset(group_by_accommodation(generate(&synth)?)?, DEFAULT_SPLIT, 0)?;
    let outcome = train(
        &split.train,
        &split.valid,
        &TrainConfig::preset(Preset::Desk),
    )?;

    let path = std::env::temp_dir().join("revrank_example.ckpt");
    save_checkpoint(&path, &outcome.best_model)?;
    let model = load_checkpoint(&path)?;
    assert_eq!(model, outcome.best_model);

    let group = &split.test[0];
    let reviews = group
        .records
        .iter()
        .map(|r| model.encode_review(&serialize_review(&r.review)))
        .collect::<revrank::Result<Vec<_>>>()?;
    for gt in GuestType::ALL {
        let mut guest = group.records[0].guest.clone();
        guest.guest_type = gt;
        let c =
            model.encode_context(&serialize_context(&guest, &group.records[0].accommodation))?;
        let mut order: Vec<(usize, f64)> = reviews.iter().map(|r| c.dot(r)).enumerate().collect();
        order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let top = &group.records[order[0].0];
        println!(
            "{:22} top review by a {:22} logit {:+.3}: {}",
            gt.label(),
            top.guest.guest_type.label(),
            order[0].1,
            top.review.review_title
        );
    }
    Ok(())
}
