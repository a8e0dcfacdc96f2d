//! Wrapper feature selection for high-dimensional classification data.
//!
//! A particle swarm is split into two halves that share a feature-importance
//! vector learned from how accuracy changes when features enter or leave a
//! subset. One half moves with PSO kinematics and is pulled toward the other
//! half's best solution; the other half samples subsets in proportion to the
//! learned importance. Subsets are scored by k-nearest-neighbour
//! cross-validation, trading error rate against subset size.
//!
//! The crate also provides a plain PSO baseline and a benchmark harness that
//! writes mean/std summaries and convergence traces as CSV.

pub mod classifier;
pub mod dataset;
pub mod error;
pub mod harness;
pub mod mask;
pub mod mel;
pub mod swarm;
pub mod synthetic;
pub mod weights;

pub use classifier::{cv_accuracy, knn_predict, EvalOutcome};
pub use dataset::{
    load_csv, minmax_scale, stratified_kfold, CsvOptions, Dataset, FoldPlan, LabelColumn,
};
pub use error::{Error, Result};
pub use harness::{run_experiment, Algorithm, ExperimentSpec, SummaryRow};
pub use mask::FeatureMask;
pub use mel::{evaluate, fitness, run_mel, run_pso_baseline, MelConfig, RunReport, TracePoint};
pub use swarm::{BestRecords, Particle, PsoParams};
pub use weights::{FeatureWeights, MaskDelta, SubsetPolicy};
