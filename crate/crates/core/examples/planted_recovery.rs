//! Runs both searches on a synthetic dataset with five planted informative
//! features and reports how many of them each run's best subset contains.
//!
//! cargo run --release -p melfs-core --example planted_recovery [runs] [shift]

use melfs::mel::{run_mel, run_pso_baseline, MelConfig};
use melfs::synthetic::{planted, PlantedSpec};

fn main() -> melfs::Result<()> {
    let mut args = std::env::args().skip(1);
    let runs: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    let shift: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1.0);
    for seed in 0..runs {
        let (ds, informative) = planted(&PlantedSpec {
            seed,
            shift,
            ..PlantedSpec::default()
        })?;
        let cfg = MelConfig {
            seed,
            ..MelConfig::default()
        };
        for (name, report) in [
            ("mel", run_mel(&ds, &cfg)?),
            ("pso", run_pso_baseline(&ds, &cfg)?),
        ] {
            let hits = informative
                .iter()
                .filter(|&&j| report.best_mask.is_selected(j))
                .count();
            println!(
                "seed {seed} {name}: planted {hits}/5, size {:>3}, acc {:.4}, fitness {:.4}, {:.2}s",
                report.best_subset_size, report.best_accuracy, report.best_fitness, report.wall_time
            );
        }
    }
    Ok(())
}
