//! Particle state, PSO kinematics and best-so-far bookkeeping.

use rand::Rng;

use crate::classifier::EvalOutcome;
use crate::error::{Error, Result};
use crate::mask::FeatureMask;

/// Source of the uniform coefficients r1, r2, r3 used by the velocity rule.
///
/// Every `Rng` is a source; [`Pinned`] returns a constant so that single
/// steps can be checked by hand.
pub trait UnitSource {
    fn unit(&mut self) -> f64;
}

impl<R: Rng + ?Sized> UnitSource for R {
    fn unit(&mut self) -> f64 {
        self.random::<f64>()
    }
}

/// Constant coefficient source.
#[derive(Clone, Copy, Debug)]
pub struct Pinned(pub f64);

impl UnitSource for Pinned {
    fn unit(&mut self) -> f64 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsoParams {
    /// Inertia weight.
    pub omega: f64,
    /// Cognitive factor (pull toward personal best).
    pub c1: f64,
    /// Social factor (pull toward global best).
    pub c2: f64,
    /// Cross-subpopulation factor (pull toward the other subpopulation's best).
    pub c3: f64,
    pub lb: f64,
    pub ub: f64,
    pub v_max: f64,
    /// A coordinate strictly above this value selects its feature.
    pub theta: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        PsoParams {
            omega: 0.9,
            c1: 2.0,
            c2: 2.0,
            c3: 2.0,
            lb: 0.0,
            ub: 1.0,
            v_max: 0.5,
            theta: 0.6,
        }
    }
}

impl PsoParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.omega, self.c1, self.c2, self.c3, self.lb, self.ub, self.v_max, self.theta,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("PSO parameters must be finite".into()));
        }
        if self.lb >= self.ub {
            return Err(Error::Config(format!(
                "lower bound {} must be below upper bound {}",
                self.lb, self.ub
            )));
        }
        if self.v_max <= 0.0 {
            return Err(Error::Config("v_max must be positive".into()));
        }
        if !(self.lb < self.theta && self.theta < self.ub) {
            return Err(Error::Config(format!(
                "theta {} must lie strictly inside ({}, {})",
                self.theta, self.lb, self.ub
            )));
        }
        if [self.omega, self.c1, self.c2, self.c3]
            .iter()
            .any(|&f| f < 0.0)
        {
            return Err(Error::Config(
                "omega, c1, c2 and c3 must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    /// Mask used in the most recent evaluation.
    pub mask: FeatureMask,
    /// Mask used in the evaluation before that.
    pub prev_mask: FeatureMask,
    /// Accuracy of the most recent evaluation, NaN before the first one.
    pub prev_accuracy: f64,
    pub pbest_position: Vec<f64>,
    pub pbest_fitness: f64,
}

impl Particle {
    pub fn dims(&self) -> usize {
        self.position.len()
    }
}

/// Random population with positions uniform on `[lb, ub]` and velocities
/// uniform on `[-v_max, v_max]`. Masks are the thresholded positions.
pub fn init_population<R: Rng + ?Sized>(
    np: usize,
    dims: usize,
    params: &PsoParams,
    rng: &mut R,
) -> Result<Vec<Particle>> {
    if np < 2 || !np.is_multiple_of(2) {
        return Err(Error::Config(format!(
            "population size must be even and at least 2 to form two equal halves, got {np}"
        )));
    }
    if dims == 0 {
        return Err(Error::Config(
            "particles need at least one dimension".into(),
        ));
    }
    params.validate()?;
    let span = params.ub - params.lb;
    let particles = (0..np)
        .map(|_| {
            let position: Vec<f64> = (0..dims)
                .map(|_| params.lb + span * rng.random::<f64>())
                .collect();
            let velocity: Vec<f64> = (0..dims)
                .map(|_| params.v_max * (2.0 * rng.random::<f64>() - 1.0))
                .collect();
            let mask = binarize(&position, params.theta);
            Particle {
                pbest_position: position.clone(),
                pbest_fitness: f64::INFINITY,
                prev_mask: mask.clone(),
                prev_accuracy: f64::NAN,
                mask,
                position,
                velocity,
            }
        })
        .collect();
    Ok(particles)
}

/// Selects feature `n` iff `position[n] > theta`.
pub fn binarize(position: &[f64], theta: f64) -> FeatureMask {
    position
        .iter()
        .map(|&x| x > theta)
        .collect::<Vec<_>>()
        .into()
}

/// Empty-selection fallback: if nothing is selected, select the coordinate
/// with the largest position value (first one on ties). Returns whether the
/// mask was changed.
pub fn repair_empty(mask: &mut FeatureMask, position: &[f64]) -> bool {
    if mask.count() > 0 || position.is_empty() {
        return false;
    }
    let mut best = 0;
    for (i, &x) in position.iter().enumerate() {
        if x > position[best] {
            best = i;
        }
    }
    mask.set(best, true);
    true
}

/// Canonical PSO move: inertia, cognitive and social terms, followed by the
/// velocity and position clamps. One `(r1, r2)` pair is drawn per coordinate.
pub fn pso_step<U: UnitSource + ?Sized>(
    p: &mut Particle,
    pbest: &[f64],
    gbest: &[f64],
    params: &PsoParams,
    rng: &mut U,
) {
    step(p, pbest, gbest, None, params, rng);
}

/// PSO move with the extra pull toward `sbest`, the best individual of the
/// other subpopulation, weighted by `c3 * r3`.
///
/// With `c3 == 0` no `r3` is drawn, so the trajectory is identical to
/// [`pso_step`] fed the same random stream.
pub fn mel_step<U: UnitSource + ?Sized>(
    p: &mut Particle,
    pbest: &[f64],
    gbest: &[f64],
    sbest: &[f64],
    params: &PsoParams,
    rng: &mut U,
) {
    step(p, pbest, gbest, Some(sbest), params, rng);
}

fn step<U: UnitSource + ?Sized>(
    p: &mut Particle,
    pbest: &[f64],
    gbest: &[f64],
    sbest: Option<&[f64]>,
    params: &PsoParams,
    rng: &mut U,
) {
    let dims = p.dims();
    debug_assert_eq!(pbest.len(), dims);
    debug_assert_eq!(gbest.len(), dims);
    let transfer = sbest.filter(|_| params.c3 != 0.0);
    for n in 0..dims {
        let x = p.position[n];
        let r1 = rng.unit();
        let r2 = rng.unit();
        let mut v = params.omega * p.velocity[n]
            + params.c1 * r1 * (pbest[n] - x)
            + params.c2 * r2 * (gbest[n] - x);
        if let Some(s) = transfer {
            let r3 = rng.unit();
            v += params.c3 * r3 * (s[n] - x);
        }
        let v = v.clamp(-params.v_max, params.v_max);
        p.velocity[n] = v;
        p.position[n] = (x + v).clamp(params.lb, params.ub);
    }
}

/// Best-so-far solution of some scope (a particle, a subpopulation or the
/// whole swarm).
#[derive(Clone, Debug, PartialEq)]
pub struct BestRecord {
    pub position: Vec<f64>,
    pub mask: FeatureMask,
    pub fitness: f64,
    pub accuracy: f64,
}

impl BestRecord {
    fn vacant(dims: usize) -> Self {
        BestRecord {
            position: vec![0.0; dims],
            mask: FeatureMask::empty(dims),
            fitness: f64::INFINITY,
            accuracy: 0.0,
        }
    }

    pub fn is_set(&self) -> bool {
        self.fitness.is_finite()
    }
}

/// Per-subpopulation and global bests. Fitness is minimized.
#[derive(Clone, Debug, PartialEq)]
pub struct BestRecords {
    pub subpopulations: Vec<BestRecord>,
    pub global: BestRecord,
}

impl BestRecords {
    pub fn new(n_subpopulations: usize, dims: usize) -> Self {
        BestRecords {
            subpopulations: vec![BestRecord::vacant(dims); n_subpopulations],
            global: BestRecord::vacant(dims),
        }
    }
}

/// Folds a fresh evaluation of `particle` (member of subpopulation `group`)
/// into its personal best and into the subpopulation and global records.
/// A record is replaced only on strict improvement, so ties keep the
/// incumbent.
pub fn update_bests(
    records: &mut BestRecords,
    group: usize,
    particle: &mut Particle,
    outcome: &EvalOutcome,
) {
    if outcome.fitness < particle.pbest_fitness {
        particle.pbest_fitness = outcome.fitness;
        particle.pbest_position.clone_from(&particle.position);
    }
    let candidate = || BestRecord {
        position: particle.position.clone(),
        mask: particle.mask.clone(),
        fitness: outcome.fitness,
        accuracy: outcome.accuracy,
    };
    if outcome.fitness < records.subpopulations[group].fitness {
        records.subpopulations[group] = candidate();
    }
    if outcome.fitness < records.global.fitness {
        records.global = candidate();
    }
}
