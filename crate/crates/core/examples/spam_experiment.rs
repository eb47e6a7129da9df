//! Accuracy of each method at k = number of spammers, for random and fixed
//! synthetic spam on a population with item-specific label distributions.
//!
//! cargo run --release -p annofilter --example spam_experiment -- [seed]

use annofilter::{
    sweep, synth_fixed, synth_random, varied_population, Method, PopulationSpec, ScoringConfig,
};

fn main() -> annofilter::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let spec = PopulationSpec {
        n_items: 50,
        n_annotators: 100,
        n_spam: 15,
        k: 3,
        reliability_floor: 0.0,
        seed,
    };
    let (clean, roster) = varied_population(&spec)?;
    let config = ScoringConfig { seed, ..ScoringConfig::default() };
    for (name, matrix) in [
        ("random", synth_random(&clean, &roster, seed)?),
        ("fixed", synth_fixed(&clean, &roster)?),
    ] {
        let report = sweep(&matrix, &roster, &Method::ALL, spec.n_spam, &config)?;
        println!("{name} spam, k = {}:", spec.n_spam);
        for method in Method::ALL {
            let row = report.row(method, spec.n_spam).expect("row exists");
            println!(
                "  {:<10} accuracy {:.3}  entropy {:.3}  kl {:.3}",
                method.name(),
                row.metrics.accuracy,
                row.metrics.mean_entropy,
                row.metrics.kl
            );
        }
    }
    Ok(())
}
