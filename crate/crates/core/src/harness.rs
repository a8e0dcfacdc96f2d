//! Repeated seeded experiments and their CSV artifacts.
//!
//! Output directory layout:
//!
//! ```text
//! summary.csv                           mean/std of accuracy, subset size, fitness
//! runs.csv                              one row per run, with its seed
//! timing.csv                            wall-clock mean/std per cell
//! convergence/<data>__<algo>__seed<N>.csv
//! weights/<data>__mel__seed<N>.csv      only with a weight trace enabled
//! ```
//!
//! Everything except `timing.csv` is a pure function of the inputs and the
//! experiment spec.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::dataset::{load_csv, minmax_scale, CsvOptions, Dataset};
use crate::error::{Error, Result};
use crate::mel::{run_mel, run_pso_baseline, MelConfig, RunReport};

pub const STD_NOTE: &str =
    "# std columns: population standard deviation, sqrt(sum((x - mean)^2) / n) over repeats";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Mel,
    Pso,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Mel => "mel",
            Algorithm::Pso => "pso",
        }
    }

    pub fn run(self, ds: &Dataset, cfg: &MelConfig) -> Result<RunReport> {
        match self {
            Algorithm::Mel => run_mel(ds, cfg),
            Algorithm::Pso => run_pso_baseline(ds, cfg),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "mel" => Ok(Algorithm::Mel),
            "pso" => Ok(Algorithm::Pso),
            other => Err(format!("unknown algorithm `{other}` (expected mel or pso)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub datasets: Vec<PathBuf>,
    pub algorithms: Vec<Algorithm>,
    /// Base configuration; run `i` uses seed `config.seed + i`.
    pub config: MelConfig,
    pub csv: CsvOptions,
    /// Min-max scale features before searching.
    pub scale: bool,
    pub out_dir: PathBuf,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::Config("at least one dataset is required".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("at least one algorithm is required".into()));
        }
        self.config.validate()
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.config.repeats as u64)
            .map(|i| self.config.seed.wrapping_add(i))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub seeds: Vec<u64>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub mean_subset_size: f64,
    pub std_subset_size: f64,
    pub mean_fitness: f64,
    pub std_fitness: f64,
    pub mean_wall_time: f64,
    pub std_wall_time: f64,
    /// Set when any run of this cell failed; the statistics are then NaN.
    pub error: Option<String>,
}

impl SummaryRow {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Clone, Debug)]
pub struct RunRecord {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub repeat: usize,
    pub report: RunReport,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub rows: Vec<SummaryRow>,
    pub runs: Vec<RunRecord>,
}

impl ExperimentOutcome {
    pub fn any_failed(&self) -> bool {
        self.rows.iter().any(SummaryRow::failed)
    }
}

/// Population mean and standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn artifact_name(dataset: &str, algorithm: Algorithm, seed: u64) -> String {
    format!("{dataset}__{algorithm}__seed{seed}.csv")
}

/// Runs every (dataset, algorithm) cell `repeats` times and writes the
/// artifacts. A failing cell is reported as a failed row; the other cells
/// still run. Only spec validation and output I/O errors abort.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    spec.validate()?;
    let conv_dir = spec.out_dir.join("convergence");
    let weights_dir = spec.out_dir.join("weights");
    fs::create_dir_all(&conv_dir).map_err(|e| Error::io(&conv_dir, e))?;
    if spec.config.weight_trace_top > 0 {
        fs::create_dir_all(&weights_dir).map_err(|e| Error::io(&weights_dir, e))?;
    }

    let seeds = spec.seeds();
    let mut rows = Vec::new();
    let mut runs = Vec::new();

    for path in &spec.datasets {
        let name = dataset_name(path);
        let loaded =
            load_csv(path, spec.csv).map(|ds| if spec.scale { minmax_scale(&ds) } else { ds });
        for &algorithm in &spec.algorithms {
            let ds = match &loaded {
                Ok(ds) => ds,
                Err(e) => {
                    rows.push(failed_row(&name, algorithm, &seeds, e.to_string()));
                    continue;
                }
            };
            let mut cell = Vec::with_capacity(seeds.len());
            let mut failure = None;
            for (repeat, &seed) in seeds.iter().enumerate() {
                let cfg = MelConfig {
                    seed,
                    ..spec.config.clone()
                };
                match algorithm.run(ds, &cfg) {
                    Ok(report) => cell.push(report),
                    Err(e) => {
                        failure = Some(format!("seed {seed} (repeat {repeat}): {e}"));
                        break;
                    }
                }
            }
            if let Some(msg) = failure {
                rows.push(failed_row(&name, algorithm, &seeds, msg));
                continue;
            }
            for report in &cell {
                let file = artifact_name(&name, algorithm, report.seed);
                emit_convergence_csv(report, &conv_dir.join(&file))?;
                if algorithm == Algorithm::Mel && spec.config.weight_trace_top > 0 {
                    emit_weight_trace_csv(report, &weights_dir.join(&file))?;
                }
            }
            rows.push(summarize(&name, algorithm, &seeds, &cell));
            runs.extend(
                cell.into_iter()
                    .enumerate()
                    .map(|(repeat, report)| RunRecord {
                        dataset: name.clone(),
                        algorithm,
                        repeat,
                        report,
                    }),
            );
        }
    }

    write_summary_csv(&rows, &spec.out_dir.join("summary.csv"))?;
    write_runs_csv(&runs, &spec.out_dir.join("runs.csv"))?;
    write_timing_csv(&rows, &spec.out_dir.join("timing.csv"))?;
    Ok(ExperimentOutcome { rows, runs })
}

fn failed_row(dataset: &str, algorithm: Algorithm, seeds: &[u64], error: String) -> SummaryRow {
    SummaryRow {
        dataset: dataset.to_string(),
        algorithm,
        seeds: seeds.to_vec(),
        mean_accuracy: f64::NAN,
        std_accuracy: f64::NAN,
        mean_subset_size: f64::NAN,
        std_subset_size: f64::NAN,
        mean_fitness: f64::NAN,
        std_fitness: f64::NAN,
        mean_wall_time: f64::NAN,
        std_wall_time: f64::NAN,
        error: Some(error),
    }
}

pub fn summarize(
    dataset: &str,
    algorithm: Algorithm,
    seeds: &[u64],
    reports: &[RunReport],
) -> SummaryRow {
    let column = |f: fn(&RunReport) -> f64| mean_std(&reports.iter().map(f).collect::<Vec<_>>());
    let (mean_accuracy, std_accuracy) = column(|r| r.best_accuracy);
    let (mean_subset_size, std_subset_size) = column(|r| r.best_subset_size as f64);
    let (mean_fitness, std_fitness) = column(|r| r.best_fitness);
    let (mean_wall_time, std_wall_time) = column(|r| r.wall_time);
    SummaryRow {
        dataset: dataset.to_string(),
        algorithm,
        seeds: seeds.to_vec(),
        mean_accuracy,
        std_accuracy,
        mean_subset_size,
        std_subset_size,
        mean_fitness,
        std_fitness,
        mean_wall_time,
        std_wall_time,
        error: None,
    }
}

/// Formats like C's `%.17g`: 17 significant digits, trailing zeros removed,
/// exponent notation outside `1e-5 <= |x| < 1e17`.
pub fn format_g17(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();

    if !(-5..17).contains(&exp) {
        let mut m = format!("{}.{}", &digits[..1], &digits[1..]);
        trim_fraction(&mut m);
        let esign = if exp < 0 { '-' } else { '+' };
        return format!("{sign}{m}e{esign}{:02}", exp.abs());
    }
    let mut out = if exp < 0 {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    } else {
        let split = exp as usize + 1;
        format!("{}.{}", &digits[..split], &digits[split..])
    };
    trim_fraction(&mut out);
    format!("{sign}{out}")
}

fn trim_fraction(s: &mut String) {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
}

fn create(path: &Path) -> Result<std::io::BufWriter<fs::File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(std::io::BufWriter::new(file))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Per-generation global-best trace: `iteration,best_fitness,best_accuracy,subset_size`,
/// one row per generation starting at the initial population.
pub fn emit_convergence_csv(report: &RunReport, path: &Path) -> Result<()> {
    let mut out = String::from("iteration,best_fitness,best_accuracy,subset_size\n");
    for (i, point) in report.trace.iter().enumerate() {
        out.push_str(&format!(
            "{i},{},{},{}\n",
            format_g17(point.best_fitness),
            format_g17(point.best_accuracy),
            point.subset_size
        ));
    }
    write_text(path, &out)
}

/// `iteration,feature_index,weight` for the heaviest weights of every
/// generation.
pub fn emit_weight_trace_csv(report: &RunReport, path: &Path) -> Result<()> {
    let mut out = String::from("iteration,feature_index,weight\n");
    for snap in &report.weight_trace {
        for &(feature, weight) in &snap.top {
            out.push_str(&format!(
                "{},{feature},{}\n",
                snap.iteration,
                format_g17(weight)
            ));
        }
    }
    write_text(path, &out)
}

fn stat(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format_g17(x)
    }
}

fn seed_list(seeds: &[u64]) -> String {
    seeds
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

fn status(row: &SummaryRow) -> String {
    match &row.error {
        None => "ok".into(),
        Some(e) => format!("\"failed: {}\"", e.replace('"', "'")),
    }
}

pub fn write_summary_csv(rows: &[SummaryRow], path: &Path) -> Result<()> {
    let mut out = format!("{STD_NOTE}\n");
    out.push_str(
        "dataset,algorithm,runs,seeds,mean_accuracy,std_accuracy,mean_subset_size,\
         std_subset_size,mean_fitness,std_fitness,status\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.dataset,
            r.algorithm,
            r.seeds.len(),
            seed_list(&r.seeds),
            stat(r.mean_accuracy),
            stat(r.std_accuracy),
            stat(r.mean_subset_size),
            stat(r.std_subset_size),
            stat(r.mean_fitness),
            stat(r.std_fitness),
            status(r),
        ));
    }
    write_text(path, &out)
}

fn write_runs_csv(runs: &[RunRecord], path: &Path) -> Result<()> {
    let mut out = String::from(
        "dataset,algorithm,repeat,seed,best_accuracy,best_subset_size,best_fitness,evaluations,best_features\n",
    );
    for r in runs {
        let features = r
            .report
            .best_mask
            .indices()
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(";");
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{features}\n",
            r.dataset,
            r.algorithm,
            r.repeat,
            r.report.seed,
            format_g17(r.report.best_accuracy),
            r.report.best_subset_size,
            format_g17(r.report.best_fitness),
            r.report.evaluations,
        ));
    }
    write_text(path, &out)
}

fn write_timing_csv(rows: &[SummaryRow], path: &Path) -> Result<()> {
    let mut out = format!("{STD_NOTE}\ndataset,algorithm,mean_wall_time_s,std_wall_time_s\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.dataset,
            r.algorithm,
            stat(r.mean_wall_time),
            stat(r.std_wall_time)
        ));
    }
    write_text(path, &out)
}
