//! Agents and how they are optimized.
//!
//! A [`Solver`] exposes the two operations every inner-loop learner needs:
//! `evaluate` (mean episode return) and `optimize_step` (one optimizer
//! update). Candidate evaluations are dispatched to the worker pool.

mod es;
mod policy;

pub use es::{centered_ranks, es_step, EsConfig, EsStep};
pub use policy::{act, sample_index, softmax, Arch, PolicyParams};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maze::{run_episode, solvable, Level, DEFAULT_HORIZON};
use crate::runtime::pool::WorkerPool;
use crate::runtime::seed::Seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub new_params: PolicyParams,
    pub mean_fitness: f64,
    pub best_fitness: f64,
    pub evals_used: usize,
}

/// Mean return of `episodes` runs; episode `e` uses `seed.derive("episode", [e])`.
pub fn evaluate(params: &PolicyParams, level: &Level, episodes: usize, horizon: usize, seed: Seed) -> Result<f64> {
    if episodes == 0 {
        return Err(Error::Config("episodes must be at least 1".into()));
    }
    if params.arch.input_dim != crate::maze::OBS_DIM {
        return Err(Error::DimensionMismatch {
            expected: crate::maze::OBS_DIM,
            got: params.arch.input_dim,
        });
    }
    // No episode can score on a level whose goal is unreachable.
    if !solvable(level) {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for e in 0..episodes {
        total += run_episode(level, params, horizon, seed.derive("episode", &[e as u64]).0)?.episode_return;
    }
    Ok(total / episodes as f64)
}

#[derive(Debug, Clone)]
pub struct Solver {
    pub es: EsConfig,
    pub horizon: usize,
    pool: WorkerPool,
}

impl Solver {
    pub fn new(es: EsConfig, horizon: usize, pool: WorkerPool) -> Result<Self> {
        es.validate()?;
        if horizon == 0 {
            return Err(Error::Config("horizon must be positive".into()));
        }
        Ok(Solver { es, horizon, pool })
    }

    pub fn with_defaults(pool: WorkerPool) -> Self {
        Solver {
            es: EsConfig::default(),
            horizon: DEFAULT_HORIZON,
            pool,
        }
    }

    pub fn pool(&self) -> &WorkerPool {
        &self.pool
    }

    pub fn evaluate(&self, params: &PolicyParams, level: &Level, episodes: usize, seed: Seed) -> Result<f64> {
        evaluate(params, level, episodes, self.horizon, seed)
    }

    /// One ES update of `params` on `level`.
    ///
    /// All candidates of a step share the same episode seeds.
    pub fn optimize_step(&self, params: &PolicyParams, level: &Level, seed: Seed) -> Result<OptimizeReport> {
        self.optimize_step_with(params, level, &self.es, seed)
    }

    pub fn optimize_step_with(
        &self,
        params: &PolicyParams,
        level: &Level,
        es: &EsConfig,
        seed: Seed,
    ) -> Result<OptimizeReport> {
        let eval_seed = seed.derive("candidate-episodes", &[]);
        let step = es_step(params.weights(), es, seed, &self.pool, |_, w| {
            let candidate = params.with_weights(w.to_vec())?;
            evaluate(&candidate, level, es.episodes_per_eval, self.horizon, eval_seed)
        })?;
        Ok(OptimizeReport {
            new_params: params.with_weights(step.theta)?,
            mean_fitness: step.mean_fitness,
            best_fitness: step.best_fitness,
            evals_used: es.pop_size * es.episodes_per_eval,
        })
    }
}
