//! Writes a small synthetic CSV with one broken row, ingests it leniently,
//! prints the statistics report and splits accommodations 80/10/10.

use std::io::Write;

use revrank::dataset::{
    group_by_accommodation, load_csv, split_dataset, validate_statistics, write_csv, SchemaMode,
    DEFAULT_SPLIT,
};
use revrank::synthgen::{generate, SynthConfig};

fn main() -> revrank::Result<()> {
    let dir = std::env::temp_dir().join("revrank_ingest_example");
    std::fs::create_dir_all(&dir).map_err(|e| revrank::Error::io(&dir, e))?;
    let path = dir.join("reviews.csv");

    let config = SynthConfig {
        n_accommodations: 40,
        ..SynthConfig::default()
    };
    write_csv(&path, &generate(&config)?)?;
    let mut file = std::fs::OpenOptions::new()
        .append(true)
        .open(&path)
        .map_err(|e| revrank::Error::io(&path, e))?;
    writeln!(
        file,
        "Bad,row,,11.5,0,Couple,Peru,2,July,acc99999,Hotel,8.0,Peru,3,0,0,1"
    )
    .map_err(|e| revrank::Error::io(&path, e))?;

    let loaded = load_csv(&path, SchemaMode::Lenient)?;
    for r in &loaded.rejections {
        println!("rejected row {}: {}", r.row, r.reason);
    }
    if let Err(e) = load_csv(&path, SchemaMode::Strict) {
        println!("strict mode: {e}");
    }
    print!("{}", validate_statistics(&loaded.records)?.to_table());

    let split = split_dataset(group_by_accommodation(loaded.records)?, DEFAULT_SPLIT, 0)?;
    println!(
        "accommodations: train {} / validation {} / test {}",
        split.train.len(),
        split.valid.len(),
        split.test.len()
    );
    Ok(())
}
