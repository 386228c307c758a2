//! Epoch plans from both samplers on a tiny corpus, with the plan checker.

use revrank::dataset::{flatten_groups, group_by_accommodation};
use revrank::sampling::{in_accommodation_epoch, random_epoch, verify_plan};
use revrank::synthgen::{generate, SynthConfig};

fn main() -> revrank::Result<()> {
    let config = SynthConfig {
        n_accommodations: 3,
        reviews_per_accommodation: (3, 7),
        seed: 4,
        ..SynthConfig::default()
    };
    let groups = group_by_accommodation(generate(&config)?)?;
    let records = flatten_groups(&groups);
    for g in &groups {
        println!("{}: {} reviews", g.accommodation_id, g.len());
    }

    let random = random_epoch(records.len(), 4, 9)?;
    println!("-- random\n{}", random.manifest());
    let grouped = in_accommodation_epoch(&groups, 4, 9)?;
    println!("-- in-accommodation\n{}", grouped.manifest());
    for plan in [&random, &grouped] {
        println!("violations: {}", verify_plan(plan, &records).len());
    }
    Ok(())
}
