//! The two-subpopulation search and the plain PSO baseline.
//!
//! The population is split in half by index. The first half moves with PSO
//! kinematics plus a pull toward the second half's best individual. The
//! second half does not move at all: each generation it draws fresh feature
//! subsets from the shared importance weights. Both halves feed every
//! evaluation back into those weights.
//!
//! Within a generation all random draws (movement, sampling) happen serially
//! before evaluation, evaluations may run in parallel, and all state updates
//! are applied afterwards in particle-index order. A run is therefore a pure
//! function of its dataset and configuration.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::classifier::{cv_accuracy, EvalOutcome};
use crate::dataset::{stratified_kfold, Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::mask::FeatureMask;
use crate::swarm::{
    binarize, init_population, mel_step, pso_step, repair_empty, update_bests, BestRecord,
    BestRecords, Particle, PsoParams,
};
use crate::weights::{roulette_sample, update_weights, FeatureWeights, MaskDelta, SubsetPolicy};

const TRANSFER_GROUP: usize = 0;
const WEIGHTED_GROUP: usize = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct MelConfig {
    /// Population size; split into two equal halves.
    pub np: usize,
    /// Generations after the initial evaluation.
    pub iterations: usize,
    pub pso: PsoParams,
    /// Weight of the error rate in the fitness.
    pub alpha: f64,
    /// Weight of the selected-feature ratio in the fitness.
    pub beta: f64,
    pub k_nn: usize,
    pub cv_folds: usize,
    pub seed: u64,
    pub repeats: usize,
    pub subset_policy: SubsetPolicy,
    /// Record the heaviest `weight_trace_top` feature weights every
    /// generation; 0 disables the trace.
    pub weight_trace_top: usize,
}

impl Default for MelConfig {
    fn default() -> Self {
        MelConfig {
            np: 20,
            iterations: 100,
            pso: PsoParams::default(),
            alpha: 0.9,
            beta: 0.1,
            k_nn: 3,
            cv_folds: 5,
            seed: 0,
            repeats: 10,
            subset_policy: SubsetPolicy::UniformCount,
            weight_trace_top: 0,
        }
    }
}

impl MelConfig {
    pub fn validate(&self) -> Result<()> {
        self.pso.validate()?;
        if self.np < 2 || !self.np.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "population size must be even and at least 2, got {}",
                self.np
            )));
        }
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if !(self.alpha >= 0.0 && self.beta >= 0.0) {
            return Err(Error::Config("alpha and beta must be non-negative".into()));
        }
        if (self.alpha + self.beta - 1.0).abs() > 1e-9 {
            return Err(Error::Config("alpha + beta must equal 1".into()));
        }
        if self.k_nn == 0 {
            return Err(Error::Config("knn k must be at least 1".into()));
        }
        if self.cv_folds < 2 {
            return Err(Error::Config("at least 2 folds are required".into()));
        }
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        if let SubsetPolicy::Bernoulli { scale } = self.subset_policy {
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(Error::Config("bernoulli scale must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Global-best state after one generation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePoint {
    pub best_fitness: f64,
    pub best_accuracy: f64,
    pub subset_size: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightSnapshot {
    pub iteration: usize,
    /// `(feature, weight)`, heaviest first.
    pub top: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub best_mask: FeatureMask,
    pub best_accuracy: f64,
    pub best_subset_size: usize,
    pub best_fitness: f64,
    /// One point per generation, index 0 being the initial population.
    pub trace: Vec<TracePoint>,
    /// Whole-run wall clock, seconds.
    pub wall_time: f64,
    pub evaluations: usize,
    pub seed: u64,
    pub weight_trace: Vec<WeightSnapshot>,
}

/// `alpha * error_rate + beta * n_selected / n_total`, to be minimized.
pub fn fitness(
    error_rate: f64,
    n_selected: usize,
    n_total: usize,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    if n_selected == 0 {
        return Err(Error::EmptyMask);
    }
    if n_selected > n_total {
        return Err(Error::Config(format!(
            "{n_selected} selected features out of {n_total}"
        )));
    }
    Ok(alpha * error_rate + beta * (n_selected as f64 / n_total as f64))
}

/// Cross-validated accuracy of `mask` and its fitness.
pub fn evaluate(
    mask: &FeatureMask,
    ds: &Dataset,
    plan: &FoldPlan,
    cfg: &MelConfig,
) -> Result<EvalOutcome> {
    let accuracy = cv_accuracy(ds, mask, plan, cfg.k_nn)?;
    let error_rate = 1.0 - accuracy;
    let n_selected = mask.count();
    let fitness = fitness(error_rate, n_selected, ds.n_features(), cfg.alpha, cfg.beta)?;
    Ok(EvalOutcome {
        accuracy,
        error_rate,
        n_selected,
        fitness,
    })
}

fn evaluate_all(
    particles: &[Particle],
    ds: &Dataset,
    plan: &FoldPlan,
    cfg: &MelConfig,
) -> Result<Vec<EvalOutcome>> {
    particles
        .par_iter()
        .map(|p| evaluate(&p.mask, ds, plan, cfg))
        .collect()
}

fn swarm_rng(seed: u64) -> ChaCha8Rng {
    // stream 0 of the same seed is not used anywhere; folds use their own
    // generator, so movement draws are independent of the fold plan
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

fn check_inputs(ds: &Dataset, cfg: &MelConfig) -> Result<()> {
    cfg.validate()?;
    if ds.n_samples() < cfg.cv_folds {
        return Err(Error::FoldCount {
            k: cfg.cv_folds,
            n_samples: ds.n_samples(),
        });
    }
    Ok(())
}

fn trace_point(best: &BestRecord) -> TracePoint {
    TracePoint {
        best_fitness: best.fitness,
        best_accuracy: best.accuracy,
        subset_size: best.mask.count(),
    }
}

/// Position whose thresholding reproduces `mask`: selected coordinates at
/// the upper bound, the rest at the lower bound.
fn embed(mask: &FeatureMask, params: &PsoParams) -> Vec<f64> {
    mask.as_slice()
        .iter()
        .map(|&s| if s { params.ub } else { params.lb })
        .collect()
}

/// Stateful two-subpopulation search. [`run_mel`] drives it to completion;
/// the half-steps are public so the hand-off between the subpopulations can
/// be observed.
pub struct MelSearch<'a> {
    ds: &'a Dataset,
    cfg: &'a MelConfig,
    plan: FoldPlan,
    rng: ChaCha8Rng,
    particles: Vec<Particle>,
    weights: FeatureWeights,
    records: BestRecords,
    trace: Vec<TracePoint>,
    weight_trace: Vec<WeightSnapshot>,
    evaluations: usize,
    iteration: usize,
}

impl<'a> MelSearch<'a> {
    /// Initializes the population and evaluates it once.
    pub fn new(ds: &'a Dataset, cfg: &'a MelConfig) -> Result<Self> {
        check_inputs(ds, cfg)?;
        let plan = stratified_kfold(ds, cfg.cv_folds, cfg.seed)?;
        let mut rng = swarm_rng(cfg.seed);
        let dims = ds.n_features();
        let mut particles = init_population(cfg.np, dims, &cfg.pso, &mut rng)?;
        for p in &mut particles {
            repair_empty(&mut p.mask, &p.position);
        }
        let mut search = MelSearch {
            ds,
            cfg,
            plan,
            rng,
            particles,
            weights: FeatureWeights::zeros(dims),
            records: BestRecords::new(2, dims),
            trace: Vec::with_capacity(cfg.iterations + 1),
            weight_trace: Vec::new(),
            evaluations: 0,
            iteration: 0,
        };
        let outcomes = evaluate_all(&search.particles, ds, &search.plan, cfg)?;
        search.evaluations += outcomes.len();
        let half = search.half();
        for (i, (p, o)) in search.particles.iter_mut().zip(&outcomes).enumerate() {
            let group = if i < half {
                TRANSFER_GROUP
            } else {
                WEIGHTED_GROUP
            };
            p.prev_mask = p.mask.clone();
            p.prev_accuracy = o.accuracy;
            update_bests(&mut search.records, group, p, o);
        }
        search.close_generation();
        Ok(search)
    }

    fn half(&self) -> usize {
        self.cfg.np / 2
    }

    /// Moves the first subpopulation toward personal, global and
    /// second-subpopulation bests, evaluates it and folds the results into
    /// the weights and records.
    pub fn step_transfer_group(&mut self) -> Result<()> {
        let half = self.half();
        let gbest = self.records.global.position.clone();
        let sbest = self.records.subpopulations[WEIGHTED_GROUP].position.clone();
        let params = self.cfg.pso;
        for p in &mut self.particles[..half] {
            let pbest = std::mem::take(&mut p.pbest_position);
            mel_step(p, &pbest, &gbest, &sbest, &params, &mut self.rng);
            p.pbest_position = pbest;
            p.mask = binarize(&p.position, params.theta);
            repair_empty(&mut p.mask, &p.position);
        }
        self.evaluate_and_learn(0..half, TRANSFER_GROUP)
    }

    /// Draws new subsets for the second subpopulation from the current
    /// weights, evaluates them and folds the results back in.
    pub fn step_weighted_group(&mut self) -> Result<()> {
        let half = self.half();
        let params = self.cfg.pso;
        for p in &mut self.particles[half..] {
            p.mask = roulette_sample(&self.weights, self.cfg.subset_policy, &mut self.rng);
            p.position = embed(&p.mask, &params);
        }
        self.evaluate_and_learn(half..self.cfg.np, WEIGHTED_GROUP)
    }

    fn evaluate_and_learn(&mut self, range: std::ops::Range<usize>, group: usize) -> Result<()> {
        let outcomes = evaluate_all(
            &self.particles[range.clone()],
            self.ds,
            &self.plan,
            self.cfg,
        )?;
        self.evaluations += outcomes.len();
        for (p, o) in self.particles[range].iter_mut().zip(&outcomes) {
            let delta = MaskDelta::between(&p.prev_mask, &p.mask);
            update_weights(&mut self.weights, &delta, p.prev_accuracy, o.accuracy);
            update_bests(&mut self.records, group, p, o);
            p.prev_mask = p.mask.clone();
            p.prev_accuracy = o.accuracy;
        }
        Ok(())
    }

    fn close_generation(&mut self) {
        self.trace.push(trace_point(&self.records.global));
        if self.cfg.weight_trace_top > 0 {
            self.weight_trace.push(WeightSnapshot {
                iteration: self.iteration,
                top: self.weights.top(self.cfg.weight_trace_top),
            });
        }
    }

    /// One full generation: first subpopulation, then second.
    pub fn step(&mut self) -> Result<()> {
        self.step_transfer_group()?;
        self.step_weighted_group()?;
        self.iteration += 1;
        self.close_generation();
        Ok(())
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn weights(&self) -> &FeatureWeights {
        &self.weights
    }

    pub fn records(&self) -> &BestRecords {
        &self.records
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn fold_plan(&self) -> &FoldPlan {
        &self.plan
    }

    fn into_report(self, wall_time: f64) -> RunReport {
        finish(
            self.records.global,
            self.trace,
            self.weight_trace,
            self.evaluations,
            self.cfg.seed,
            wall_time,
        )
    }
}

fn finish(
    best: BestRecord,
    trace: Vec<TracePoint>,
    weight_trace: Vec<WeightSnapshot>,
    evaluations: usize,
    seed: u64,
    wall_time: f64,
) -> RunReport {
    RunReport {
        best_subset_size: best.mask.count(),
        best_accuracy: best.accuracy,
        best_fitness: best.fitness,
        best_mask: best.mask,
        trace,
        wall_time,
        evaluations,
        seed,
        weight_trace,
    }
}

/// Runs the two-subpopulation search for `cfg.iterations` generations.
pub fn run_mel(ds: &Dataset, cfg: &MelConfig) -> Result<RunReport> {
    let start = Instant::now();
    let mut search = MelSearch::new(ds, cfg)?;
    for _ in 0..cfg.iterations {
        search.step()?;
    }
    Ok(search.into_report(start.elapsed().as_secs_f64()))
}

/// Standard PSO over the whole population: same initialization, evaluation
/// and empty-mask repair as [`run_mel`], no weight learning, no transfer
/// term.
pub fn run_pso_baseline(ds: &Dataset, cfg: &MelConfig) -> Result<RunReport> {
    let start = Instant::now();
    check_inputs(ds, cfg)?;
    let plan = stratified_kfold(ds, cfg.cv_folds, cfg.seed)?;
    let mut rng = swarm_rng(cfg.seed);
    let dims = ds.n_features();
    let params = cfg.pso;
    let mut particles = init_population(cfg.np, dims, &params, &mut rng)?;
    let mut records = BestRecords::new(1, dims);
    let mut trace = Vec::with_capacity(cfg.iterations + 1);
    let mut evaluations = 0;

    for generation in 0..=cfg.iterations {
        if generation > 0 {
            let gbest = records.global.position.clone();
            for p in &mut particles {
                let pbest = std::mem::take(&mut p.pbest_position);
                pso_step(p, &pbest, &gbest, &params, &mut rng);
                p.pbest_position = pbest;
                p.mask = binarize(&p.position, params.theta);
            }
        }
        for p in &mut particles {
            repair_empty(&mut p.mask, &p.position);
        }
        let outcomes = evaluate_all(&particles, ds, &plan, cfg)?;
        evaluations += outcomes.len();
        for (p, o) in particles.iter_mut().zip(&outcomes) {
            update_bests(&mut records, 0, p, o);
        }
        trace.push(trace_point(&records.global));
    }

    Ok(finish(
        records.global,
        trace,
        Vec::new(),
        evaluations,
        cfg.seed,
        start.elapsed().as_secs_f64(),
    ))
}
