//! Acceptance suite. Prints one PASS/FAIL line per criterion and a tally.
//!
//! By default the process exits 0 so the workspace test run completes and
//! shows every line; set `MELFS_ACCEPTANCE_STRICT=1` to exit 1 on any FAIL.
//!
//! Environment:
//! - `MELFS_COLON_CSV`: Colon data file (default `<workspace>/data/colon.csv`)
//! - `MELFS_COLON_LABEL`: `first` or `last` (default `last`)
//! - `MELFS_COLON_HEADER`: set to `1` if the file has a header row

mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use common::{brute_cv, hand_rho, random_dataset, random_nonempty_mask, rng, transcribed_update};
use melfs::dataset::{load_csv, stratified_kfold, CsvOptions, LabelColumn};
use melfs::harness::{format_g17, run_experiment, Algorithm, ExperimentOutcome, ExperimentSpec};
use melfs::mel::{fitness, run_mel, run_pso_baseline, MelConfig, RunReport, TracePoint};
use melfs::synthetic::{planted, PlantedSpec};
use melfs::weights::{
    roulette_sample, selection_probabilities, update_weights, FeatureWeights, MaskDelta,
    SubsetPolicy,
};
use melfs::FeatureMask;
use rand::Rng;

struct Verdict {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn verdict(id: u32, title: &'static str, pass: bool, detail: String) -> Verdict {
    Verdict {
        id,
        title,
        pass,
        detail,
    }
}

fn main() {
    let started = Instant::now();
    let mut traces: Vec<(String, Vec<TracePoint>)> = Vec::new();
    let mut verdicts = Vec::new();

    let colon = colon_runs();
    if let Ok(outcome) = &colon {
        for r in &outcome.runs {
            traces.push((
                format!("colon {} seed {}", r.algorithm, r.report.seed),
                r.report.trace.clone(),
            ));
        }
    }
    verdicts.push(criterion_1(&colon));
    verdicts.push(criterion_2(&colon));
    verdicts.push(criterion_3(&mut traces));
    verdicts.push(criterion_4());
    verdicts.push(criterion_5());
    verdicts.push(criterion_6());
    verdicts.push(criterion_7());
    verdicts.push(criterion_8());
    verdicts.push(criterion_9(&traces, colon.is_ok()));

    println!();
    for v in &verdicts {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{tag}] {}: {}", v.id, v.title, v.detail);
    }
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    println!(
        "acceptance: {} passed, {failed} failed ({:.0}s)",
        verdicts.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed > 0 && std::env::var("MELFS_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}

fn colon_path() -> PathBuf {
    std::env::var_os("MELFS_COLON_CSV")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/colon.csv"))
}

/// Both algorithms on Colon under the reference protocol, 10 repeats.
fn colon_runs() -> Result<ExperimentOutcome, String> {
    let path = colon_path();
    if !path.exists() {
        return Err(format!(
            "dataset unavailable: {} not found (set MELFS_COLON_CSV)",
            path.display()
        ));
    }
    let label_column = match std::env::var("MELFS_COLON_LABEL") {
        Ok(v) => v.parse().map_err(|e| format!("MELFS_COLON_LABEL: {e}"))?,
        Err(_) => LabelColumn::Last,
    };
    let csv = CsvOptions {
        label_column,
        has_header: std::env::var("MELFS_COLON_HEADER").is_ok_and(|v| v == "1"),
    };
    let ds = load_csv(&path, csv).map_err(|e| e.to_string())?;
    if ds.n_samples() != 62 || ds.n_features() != 2000 || ds.n_classes() != 2 {
        return Err(format!(
            "{} has {}x{} with {} classes, expected 62x2000 with 2",
            path.display(),
            ds.n_samples(),
            ds.n_features(),
            ds.n_classes()
        ));
    }
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = ExperimentSpec {
        datasets: vec![path],
        algorithms: vec![Algorithm::Mel, Algorithm::Pso],
        config: MelConfig::default(),
        csv,
        scale: false,
        out_dir: out.path().to_path_buf(),
    };
    let outcome = run_experiment(&spec).map_err(|e| e.to_string())?;
    match outcome.rows.iter().find(|r| r.failed()) {
        Some(r) => Err(r.error.clone().unwrap_or_default()),
        None => Ok(outcome),
    }
}

fn criterion_1(colon: &Result<ExperimentOutcome, String>) -> Verdict {
    let title = "Colon accuracy and subset size";
    let outcome = match colon {
        Ok(o) => o,
        Err(e) => return verdict(1, title, false, e.clone()),
    };
    let mel = &outcome.rows[0];
    let pass = (0.87..=0.98).contains(&mel.mean_accuracy) && mel.mean_subset_size < 600.0;
    verdict(
        1,
        title,
        pass,
        format!(
            "mel accuracy {:.4} ± {:.4} (need [0.87, 0.98]), size {:.1} ± {:.1} (need < 600)",
            mel.mean_accuracy, mel.std_accuracy, mel.mean_subset_size, mel.std_subset_size
        ),
    )
}

fn criterion_2(colon: &Result<ExperimentOutcome, String>) -> Verdict {
    let title = "Colon mel vs pso subset size and time";
    let outcome = match colon {
        Ok(o) => o,
        Err(e) => return verdict(2, title, false, e.clone()),
    };
    let (mel, pso) = (&outcome.rows[0], &outcome.rows[1]);
    let pass =
        mel.mean_subset_size < pso.mean_subset_size && mel.mean_wall_time <= pso.mean_wall_time;
    verdict(
        2,
        title,
        pass,
        format!(
            "size mel {:.1} vs pso {:.1}; time mel {:.2}s vs pso {:.2}s",
            mel.mean_subset_size, pso.mean_subset_size, mel.mean_wall_time, pso.mean_wall_time
        ),
    )
}

fn criterion_3(traces: &mut Vec<(String, Vec<TracePoint>)>) -> Verdict {
    let mut mel_hits = Vec::new();
    let mut pso_hits = Vec::new();
    for seed in 0..10u64 {
        let (ds, informative) = planted(&PlantedSpec {
            seed,
            ..PlantedSpec::default()
        })
        .expect("planted dataset");
        let cfg = MelConfig {
            seed,
            ..MelConfig::default()
        };
        let count = |r: &RunReport| {
            informative
                .iter()
                .filter(|&&j| r.best_mask.is_selected(j))
                .count()
        };
        let mel = run_mel(&ds, &cfg).expect("mel run");
        let pso = run_pso_baseline(&ds, &cfg).expect("pso run");
        mel_hits.push(count(&mel));
        pso_hits.push(count(&pso));
        traces.push((format!("planted mel seed {seed}"), mel.trace));
        traces.push((format!("planted pso seed {seed}"), pso.trace));
    }
    let mel_ok = mel_hits.iter().filter(|&&h| h >= 3).count();
    let pso_ok = pso_hits.iter().filter(|&&h| h >= 3).count();
    verdict(
        3,
        "planted feature recovery",
        mel_ok >= 8 && pso_ok < mel_ok,
        format!(
            "runs with >=3 of 5 planted: mel {mel_ok}/10 (need >= 8), pso {pso_ok}/10 (need < mel); hits mel {mel_hits:?} pso {pso_hits:?}"
        ),
    )
}

fn criterion_4() -> Verdict {
    let mut failures = Vec::new();
    let examples: [(f64, f64, f64, f64); 3] = [
        (0.7, 0.8, 0.1, -0.1),
        (0.7, 0.6, -0.1, 0.1),
        (0.7, 0.7, 0.0, 0.0),
    ];
    for (prev, now, w3, w9) in examples {
        let mut w = FeatureWeights::zeros(10);
        let delta = MaskDelta {
            gained: vec![3],
            dropped: vec![9],
        };
        update_weights(&mut w, &delta, prev, now);
        let mut reference = vec![0.0; 10];
        transcribed_update(&mut reference, &[3], &[9], prev, now);
        let close = (w.get(3) - w3).abs() < 1e-12 && (w.get(9) - w9).abs() < 1e-12;
        if !close || w.as_slice() != reference.as_slice() {
            failures.push(format!("example {prev}->{now}: {:?}", w.as_slice()));
        }
    }
    let mut r = rng(404);
    for case in 0..1000 {
        let d = r.random_range(1..40);
        let w0: Vec<f64> = (0..d).map(|_| r.random_range(-1.0..1.0)).collect();
        let prev = FeatureMask::from(random_bits(&mut r, d));
        let next = FeatureMask::from(random_bits(&mut r, d));
        let acc_prev: f64 = r.random();
        // a fraction of cases with no accuracy change
        let acc_now: f64 = if case % 10 == 0 { acc_prev } else { r.random() };
        let delta = MaskDelta::between(&prev, &next);
        let mut w = FeatureWeights::from_vec(w0.clone());
        update_weights(&mut w, &delta, acc_prev, acc_now);
        let gained: Vec<usize> = (0..d)
            .filter(|&j| !prev.is_selected(j) && next.is_selected(j))
            .collect();
        let dropped: Vec<usize> = (0..d)
            .filter(|&j| prev.is_selected(j) && !next.is_selected(j))
            .collect();
        let mut reference = w0;
        transcribed_update(&mut reference, &gained, &dropped, acc_prev, acc_now);
        let exact = w
            .as_slice()
            .iter()
            .zip(&reference)
            .all(|(a, b)| a.to_bits() == b.to_bits());
        if !exact {
            failures.push(format!("random case {case}"));
        }
    }
    verdict(
        4,
        "weight update",
        failures.is_empty(),
        if failures.is_empty() {
            "3 examples + 1000 random cases bit-identical to the case-by-case transcription".into()
        } else {
            format!("{} mismatches, first: {}", failures.len(), failures[0])
        },
    )
}

fn random_bits(r: &mut impl Rng, d: usize) -> Vec<bool> {
    (0..d).map(|_| r.random_bool(0.5)).collect()
}

fn criterion_5() -> Verdict {
    let mut r = rng(505);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let d = r.random_range(1..60);
        let mut w: Vec<f64> = (0..d).map(|_| r.random_range(-1.0..1.0)).collect();
        // guarantee positive mass
        let j = r.random_range(0..d);
        w[j] = w[j].abs() + 1e-3;
        let got =
            selection_probabilities(&FeatureWeights::from_vec(w.clone())).expect("positive mass");
        for (a, b) in got.iter().zip(hand_rho(&w)) {
            worst = worst.max((a - b).abs());
        }
    }
    let rho_ok = worst <= 1e-12;

    let mut bad_picks = 0usize;
    // a fresh vector per draw, roughly half of it non-positive
    for trial in 0..100_000 {
        let d = 2 + trial % 30;
        let w: Vec<f64> = (0..d)
            .map(|j| {
                if j == 0 {
                    0.5
                } else {
                    r.random_range(-1.0..1.0)
                }
            })
            .collect();
        let weights = FeatureWeights::from_vec(w.clone());
        let mask = roulette_sample(&weights, SubsetPolicy::UniformCount, &mut r);
        if mask.iter_selected().any(|n| w[n] <= 0.0) {
            bad_picks += 1;
        }
    }

    let w = vec![8.0, -1.0, 4.0, 0.0, 2.0, -3.0, 1.0, 0.5];
    let weights = FeatureWeights::from_vec(w.clone());
    let mut freq = vec![0usize; w.len()];
    for _ in 0..100_000 {
        for n in roulette_sample(&weights, SubsetPolicy::UniformCount, &mut r).iter_selected() {
            freq[n] += 1;
        }
    }
    let mut positive: Vec<usize> = (0..w.len()).filter(|&n| w[n] > 0.0).collect();
    positive.sort_by(|&a, &b| w[b].total_cmp(&w[a]));
    let monotone = positive.windows(2).all(|p| freq[p[0]] > freq[p[1]]);
    let ranked: Vec<usize> = positive.iter().map(|&n| freq[n]).collect();

    verdict(
        5,
        "roulette selection",
        rho_ok && bad_picks == 0 && monotone,
        format!(
            "max |rho - hand| {worst:.1e} over 1000 vectors; {bad_picks} non-positive picks in 1e5 draws; frequencies by weight rank {ranked:?}"
        ),
    )
}

fn criterion_6() -> Verdict {
    let mut r = rng(606);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let n = r.random_range(10..=30);
        let d = r.random_range(1..=10);
        let classes = r.random_range(2..=3);
        let ds = random_dataset(&mut r, n, d, classes);
        let folds = r.random_range(2..=5);
        let plan = stratified_kfold(&ds, folds, case).expect("fold plan");
        let mask = random_nonempty_mask(&mut r, d);
        let k = [1, 3, 5][case as usize % 3];
        let got = melfs::cv_accuracy(&ds, &mask, &plan, k).expect("cv");
        worst = worst.max((got - brute_cv(&ds, &mask, &plan, k)).abs());
    }
    verdict(
        6,
        "knn cross-validation oracle",
        worst <= 1e-12,
        format!("max deviation {worst:.1e} over 50 random datasets (tolerance 1e-12)"),
    )
}

fn criterion_7() -> Verdict {
    let (alpha, beta) = (0.9, 0.1);
    let mut ok = true;
    let ex1 = fitness(0.1, 100, 2000, alpha, beta).unwrap();
    ok &= ex1 == alpha * 0.1 + beta * (100.0 / 2000.0) && (ex1 - 0.095).abs() < 1e-15;
    let ex2 = fitness(0.0, 1, 1_000_000, alpha, beta).unwrap();
    ok &= ex2 > 0.0 && ex2 == beta * (1.0 / 1_000_000.0);
    ok &= fitness(1.0, 2000, 2000, alpha, beta).unwrap() == 1.0;
    ok &= fitness(0.1, 0, 2000, alpha, beta).is_err();
    let mut r = rng(707);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let total = r.random_range(1..5000usize);
        let selected = r.random_range(1..=total);
        let err: f64 = r.random();
        let a: f64 = r.random();
        let b = 1.0 - a;
        if fitness(err, selected, total, a, b).unwrap()
            != a * err + b * (selected as f64 / total as f64)
        {
            mismatches += 1;
        }
    }
    verdict(
        7,
        "fitness formula",
        ok && mismatches == 0,
        format!(
            "examples {}; {mismatches} mismatches in 1000 random inputs",
            if ok { "exact" } else { "wrong" }
        ),
    )
}

fn criterion_8() -> Verdict {
    let dir = tempfile::tempdir().expect("tempdir");
    let (ds, _) = planted(&PlantedSpec {
        n_samples: 62,
        n_features: 300,
        seed: 8,
        ..PlantedSpec::default()
    })
    .expect("planted dataset");
    let data = dir.path().join("planted.csv");
    let mut text = String::new();
    for i in 0..ds.n_samples() {
        for v in ds.row(i) {
            text.push_str(&format_g17(*v));
            text.push(',');
        }
        text.push_str(&format!("c{}\n", ds.labels()[i]));
    }
    fs::write(&data, text).expect("write dataset");

    let spec = |out: &str| ExperimentSpec {
        datasets: vec![data.clone()],
        algorithms: vec![Algorithm::Mel, Algorithm::Pso],
        config: MelConfig {
            repeats: 3,
            ..MelConfig::default()
        },
        csv: CsvOptions::default(),
        scale: false,
        out_dir: dir.path().join(out),
    };
    for out in ["a", "b"] {
        if let Err(e) = run_experiment(&spec(out)) {
            return verdict(8, "determinism", false, e.to_string());
        }
    }
    let mut files = vec![PathBuf::from("summary.csv"), PathBuf::from("runs.csv")];
    let mut conv: Vec<PathBuf> = fs::read_dir(dir.path().join("a/convergence"))
        .expect("convergence dir")
        .map(|e| Path::new("convergence").join(e.expect("entry").file_name()))
        .collect();
    conv.sort();
    files.extend(conv);
    let differing: Vec<String> = files
        .iter()
        .filter(|f| {
            fs::read(dir.path().join("a").join(f)).ok()
                != fs::read(dir.path().join("b").join(f)).ok()
        })
        .map(|f| f.display().to_string())
        .collect();
    verdict(
        8,
        "determinism",
        differing.is_empty() && files.len() == 2 + 6,
        if differing.is_empty() {
            format!(
                "{} files byte-identical across two invocations",
                files.len()
            )
        } else {
            format!("differing: {differing:?}")
        },
    )
}

fn criterion_9(traces: &[(String, Vec<TracePoint>)], colon_available: bool) -> Verdict {
    let broken: Vec<&str> = traces
        .iter()
        .filter(|(_, t)| t.windows(2).any(|w| w[1].best_fitness > w[0].best_fitness))
        .map(|(name, _)| name.as_str())
        .collect();
    let coverage = if colon_available {
        "criteria 1-3"
    } else {
        "criterion 3 only; Colon runs unavailable"
    };
    verdict(
        9,
        "monotone convergence",
        broken.is_empty(),
        format!(
            "{} traces checked ({coverage}), {} non-monotone {broken:?}",
            traces.len(),
            broken.len()
        ),
    )
}
