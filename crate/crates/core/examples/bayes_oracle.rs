//! Ideal-scorer MRR of the synthetic generator as the planted signal grows,
//! next to the random-ranking expectation H_m / m. With a dozen segment
//! tokens per review the guest type is almost certain well before 0.2.

use revrank::dataset::group_by_accommodation;
use revrank::synthgen::{generate, oracle_mrr, random_expectation, SynthConfig};

fn main() -> revrank::Result<()> {
    println!("signal\toracle_mrr\trandom_mrr");
    for signal in [0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.9] {
        let config = SynthConfig {
            signal_strength: signal,
            n_accommodations: 100,
            ..SynthConfig::default()
        };
        let groups = group_by_accommodation(generate(&config)?)?;
        println!(
            "{signal:.2}\t{:.4}\t{:.4}",
            oracle_mrr(&groups, &config),
            random_expectation(&groups)
        );
    }
    Ok(())
}
