//! Argument and config-file handling for the `melfs` binary.
//!
//! Values come from three layers: built-in defaults, an optional TOML config
//! file (`--config`), and command-line flags. Flags win over the file, and
//! the file wins over defaults.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Deserialize;
use thiserror::Error;

use melfs::dataset::{CsvOptions, LabelColumn};
use melfs::harness::{Algorithm, ExperimentSpec};
use melfs::mel::MelConfig;
use melfs::weights::SubsetPolicy;

#[derive(Debug, Error)]
pub enum UsageError {
    #[error(transparent)]
    Clap(#[from] clap::Error),
    #[error("cannot read config file {path}: {source}")]
    ConfigRead {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config file {path}: {message}")]
    ConfigParse { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Parser)]
#[command(
    name = "melfs",
    version,
    about = "Feature selection benchmark: two-subpopulation PSO with learned feature importance vs. standard PSO"
)]
pub struct Cli {
    /// TOML file with default values for any of the options below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV dataset (repeatable).
    #[arg(long = "dataset")]
    pub datasets: Vec<PathBuf>,
    /// Algorithm to run: mel or pso (repeatable).
    #[arg(long = "algo")]
    pub algorithms: Vec<Algorithm>,
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Base seed; repeat i uses seed + i.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Generations after the initial evaluation.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Population size (even).
    #[arg(long)]
    pub np: Option<usize>,
    /// Binarization threshold.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Inertia weight.
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
    /// Pull toward the other subpopulation's best.
    #[arg(long)]
    pub c3: Option<f64>,
    /// Neighbours used by the KNN classifier.
    #[arg(long)]
    pub knn: Option<usize>,
    /// Cross-validation folds.
    #[arg(long)]
    pub folds: Option<usize>,
    /// Min-max scale every feature to [0, 1] before searching.
    #[arg(long)]
    pub scale: bool,
    /// Treat the first CSV row as a header.
    #[arg(long)]
    pub header: bool,
    #[arg(long = "label-col")]
    pub label_col: Option<LabelColumn>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Dump the K heaviest feature weights per generation (mel only).
    #[arg(long = "weight-trace", value_name = "K")]
    pub weight_trace: Option<usize>,
    /// Sample weighted subsets with independent Bernoulli draws at this
    /// scale instead of a uniform subset size.
    #[arg(long = "bernoulli-scale")]
    pub bernoulli_scale: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub datasets: Option<Vec<PathBuf>>,
    pub algorithms: Option<Vec<String>>,
    pub repeats: Option<usize>,
    pub seed: Option<u64>,
    pub iters: Option<usize>,
    pub np: Option<usize>,
    pub theta: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub omega: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    pub lb: Option<f64>,
    pub ub: Option<f64>,
    pub v_max: Option<f64>,
    pub knn: Option<usize>,
    pub folds: Option<usize>,
    pub scale: Option<bool>,
    pub header: Option<bool>,
    pub label_col: Option<String>,
    pub out: Option<PathBuf>,
    pub weight_trace: Option<usize>,
    pub bernoulli_scale: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path).map_err(|source| UsageError::ConfigRead {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| UsageError::ConfigParse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

/// Parses command-line arguments (including the program name) into a
/// validated experiment spec.
pub fn parse_spec<I, T>(args: I) -> Result<ExperimentSpec, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    build_spec(cli, file)
}

pub fn build_spec(cli: Cli, file: ConfigFile) -> Result<ExperimentSpec, UsageError> {
    let datasets = if cli.datasets.is_empty() {
        file.datasets.unwrap_or_default()
    } else {
        cli.datasets
    };
    if datasets.is_empty() {
        return Err(UsageError::Invalid(
            "missing dataset path (--dataset)".into(),
        ));
    }

    let algorithms = if !cli.algorithms.is_empty() {
        cli.algorithms
    } else if let Some(names) = file.algorithms {
        names
            .iter()
            .map(|n| n.parse::<Algorithm>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(UsageError::Invalid)?
    } else {
        vec![Algorithm::Mel, Algorithm::Pso]
    };

    let label_column = match (cli.label_col, file.label_col) {
        (Some(l), _) => l,
        (None, Some(s)) => s.parse().map_err(UsageError::Invalid)?,
        (None, None) => LabelColumn::default(),
    };

    let mut cfg = MelConfig::default();
    let pick = |flag: Option<f64>, from_file: Option<f64>, default: f64| {
        flag.or(from_file).unwrap_or(default)
    };
    cfg.np = cli.np.or(file.np).unwrap_or(cfg.np);
    cfg.iterations = cli.iters.or(file.iters).unwrap_or(cfg.iterations);
    cfg.repeats = cli.repeats.or(file.repeats).unwrap_or(cfg.repeats);
    cfg.seed = cli.seed.or(file.seed).unwrap_or(cfg.seed);
    cfg.k_nn = cli.knn.or(file.knn).unwrap_or(cfg.k_nn);
    cfg.cv_folds = cli.folds.or(file.folds).unwrap_or(cfg.cv_folds);
    cfg.alpha = pick(cli.alpha, file.alpha, cfg.alpha);
    cfg.beta = pick(cli.beta, file.beta, cfg.beta);
    cfg.weight_trace_top = cli.weight_trace.or(file.weight_trace).unwrap_or(0);
    if let Some(scale) = cli.bernoulli_scale.or(file.bernoulli_scale) {
        cfg.subset_policy = SubsetPolicy::Bernoulli { scale };
    }

    let pso = &mut cfg.pso;
    pso.theta = pick(cli.theta, file.theta, pso.theta);
    pso.omega = pick(cli.omega, file.omega, pso.omega);
    pso.c1 = pick(cli.c1, file.c1, pso.c1);
    pso.c2 = pick(cli.c2, file.c2, pso.c2);
    pso.c3 = pick(cli.c3, file.c3, pso.c3);
    pso.lb = file.lb.unwrap_or(pso.lb);
    pso.ub = file.ub.unwrap_or(pso.ub);
    pso.v_max = file.v_max.unwrap_or((pso.ub - pso.lb) / 2.0);

    let spec = ExperimentSpec {
        datasets,
        algorithms,
        config: cfg,
        csv: CsvOptions {
            label_column,
            has_header: cli.header || file.header.unwrap_or(false),
        },
        scale: cli.scale || file.scale.unwrap_or(false),
        out_dir: cli
            .out
            .or(file.out)
            .unwrap_or_else(|| PathBuf::from("melfs-out")),
    };
    spec.validate()
        .map_err(|e| UsageError::Invalid(e.to_string()))?;
    Ok(spec)
}

/// Thread cap for particle evaluation from `MELFS_THREADS`; `None` when
/// unset, empty or zero.
pub fn thread_cap(value: Option<&str>) -> Result<Option<usize>, UsageError> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => match v.parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(UsageError::Invalid(format!(
                "MELFS_THREADS must be a positive integer, got `{v}`"
            ))),
        },
    }
}
