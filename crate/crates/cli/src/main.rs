use std::process::ExitCode;

use melfs::harness::run_experiment;
use melfs_cli::{parse_spec, thread_cap, UsageError};

fn main() -> ExitCode {
    let spec = match parse_spec(std::env::args_os()) {
        Ok(spec) => spec,
        Err(UsageError::Clap(e)) => e.exit(),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    match thread_cap(std::env::var("MELFS_THREADS").ok().as_deref()) {
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
            {
                eprintln!("warning: could not size thread pool: {e}");
            }
        }
        Ok(None) => {}
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }

    let outcome = match run_experiment(&spec) {
        Ok(outcome) => outcome,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    println!(
        "{:<20} {:<5} {:>19} {:>19} {:>17}",
        "dataset", "algo", "accuracy", "subset size", "time (s)"
    );
    for row in &outcome.rows {
        match &row.error {
            Some(e) => println!("{:<20} {:<5} FAILED: {e}", row.dataset, row.algorithm),
            None => println!(
                "{:<20} {:<5} {:>8.4} ± {:<8.4} {:>8.1} ± {:<8.1} {:>7.2} ± {:<7.2}",
                row.dataset,
                row.algorithm,
                row.mean_accuracy,
                row.std_accuracy,
                row.mean_subset_size,
                row.std_subset_size,
                row.mean_wall_time,
                row.std_wall_time,
            ),
        }
    }
    println!("results written to {}", spec.out_dir.display());

    if outcome.any_failed() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
