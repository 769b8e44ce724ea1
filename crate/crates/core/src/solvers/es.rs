//! Gradient-free optimizer: mirrored Gaussian perturbations, centered-rank
//! fitness shaping and a plain gradient-ascent step.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::runtime::pool::WorkerPool;
use crate::runtime::seed::Seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EsConfig {
    pub pop_size: usize,
    pub sigma: f64,
    /// Step size; zero freezes the parameters.
    pub alpha: f64,
    pub mirrored: bool,
    pub episodes_per_eval: usize,
}

impl Default for EsConfig {
    fn default() -> Self {
        EsConfig {
            pop_size: 32,
            sigma: 0.05,
            alpha: 0.01,
            mirrored: true,
            episodes_per_eval: 2,
        }
    }
}

impl EsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pop_size == 0 {
            return Err(Error::Config("es.pop_size must be positive".into()));
        }
        if self.mirrored && !self.pop_size.is_multiple_of(2) {
            return Err(Error::Config("es.pop_size must be even when mirrored".into()));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config("es.sigma must be positive".into()));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config("es.alpha must be non-negative".into()));
        }
        if self.episodes_per_eval == 0 {
            return Err(Error::Config("es.episodes_per_eval must be positive".into()));
        }
        Ok(())
    }

    fn directions(&self) -> usize {
        if self.mirrored {
            self.pop_size / 2
        } else {
            self.pop_size
        }
    }
}

/// Outcome of one update on a raw parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EsStep {
    pub theta: Vec<f64>,
    pub fitness: Vec<f64>,
    pub mean_fitness: f64,
    pub best_fitness: f64,
}

/// Centered ranks in `[-0.5, 0.5]`; tied values share their mean rank.
pub fn centered_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
        .into_iter()
        .map(|r| r / (n - 1) as f64 - 0.5)
        .collect()
}

/// One optimizer step on `theta`.
///
/// Candidate `i` is `theta + sigma * s_i * eps_{d(i)}` where the unit-normal
/// directions are keyed by `seed`; with mirroring candidates `2j` and `2j+1`
/// share direction `j` with opposite signs. `fitness` receives the candidate
/// index and its parameters and runs on the pool. The update is
/// `theta + alpha / (n * sigma) * sum_i u_i s_i eps_{d(i)}` accumulated in
/// candidate order.
pub fn es_step<F>(theta: &[f64], cfg: &EsConfig, seed: Seed, pool: &WorkerPool, fitness: F) -> Result<EsStep>
where
    F: Fn(usize, &[f64]) -> Result<f64> + Sync,
{
    cfg.validate()?;
    let dim = theta.len();
    let noise: Vec<Vec<f64>> = pool.map_range(cfg.directions(), |j| {
        let mut rng = seed.derive("es-noise", &[j as u64]).rng();
        Ok((0..dim).map(|_| StandardNormal.sample(&mut rng)).collect())
    })?;
    let direction = |i: usize| -> (&[f64], f64) {
        if cfg.mirrored {
            (&noise[i / 2], if i.is_multiple_of(2) { 1.0 } else { -1.0 })
        } else {
            (&noise[i], 1.0)
        }
    };
    let fitness_values = pool.map_range(cfg.pop_size, |i| {
        let (eps, sign) = direction(i);
        let candidate: Vec<f64> = theta
            .iter()
            .zip(eps)
            .map(|(t, e)| t + cfg.sigma * sign * e)
            .collect();
        fitness(i, &candidate)
    })?;
    if let Some((candidate, &value)) = fitness_values.iter().enumerate().find(|(_, f)| !f.is_finite()) {
        return Err(Error::NonFiniteFitness { candidate, value });
    }
    let utilities = centered_ranks(&fitness_values);
    let mut grad = vec![0.0; dim];
    for (i, u) in utilities.iter().enumerate() {
        let (eps, sign) = direction(i);
        let w = u * sign;
        for (g, e) in grad.iter_mut().zip(eps) {
            *g += w * e;
        }
    }
    let scale = cfg.alpha / (cfg.pop_size as f64 * cfg.sigma);
    let theta_new = theta.iter().zip(&grad).map(|(t, g)| t + scale * g).collect();
    let n = fitness_values.len() as f64;
    Ok(EsStep {
        theta: theta_new,
        mean_fitness: fitness_values.iter().sum::<f64>() / n,
        best_fitness: fitness_values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        fitness: fitness_values,
    })
}
