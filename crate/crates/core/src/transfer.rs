//! Agent transfer between environments, split into scoring (fill a score
//! matrix) and ranking (pick the best agent per environment column).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::managers::Pair;
use crate::maze::Level;
use crate::runtime::seed::Seed;
use crate::solvers::{EsConfig, PolicyParams, Solver};

/// `scores[i][k]` is the mean return of agent `agent_ids[i]` on env `env_ids[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    pub scores: Vec<Vec<f64>>,
    pub agent_ids: Vec<u64>,
    pub env_ids: Vec<u64>,
}

impl ScoreMatrix {
    pub fn new(scores: Vec<Vec<f64>>, agent_ids: Vec<u64>, env_ids: Vec<u64>) -> Result<Self> {
        if scores.len() != agent_ids.len() || scores.iter().any(|row| row.len() != env_ids.len()) {
            return Err(Error::MatrixShape("row/column ids"));
        }
        if scores.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Format("score matrix entries must be finite".into()));
        }
        Ok(ScoreMatrix {
            scores,
            agent_ids,
            env_ids,
        })
    }

    pub fn rows(&self) -> usize {
        self.agent_ids.len()
    }

    pub fn cols(&self) -> usize {
        self.env_ids.len()
    }

    pub fn get(&self, agent: usize, env: usize) -> f64 {
        self.scores[agent][env]
    }

    /// Column maxima, one per env.
    pub fn column_max(&self) -> Vec<f64> {
        (0..self.cols())
            .map(|k| self.scores.iter().map(|row| row[k]).fold(f64::NEG_INFINITY, f64::max))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    ZeroShot,
    OneShot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assigned {
    pub env_id: u64,
    pub agent_id: u64,
    pub source: Source,
}

/// Winner per env, in the column order of the ranked matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferAssignment {
    pub entries: Vec<Assigned>,
}

impl TransferAssignment {
    pub fn get(&self, env_id: u64) -> Option<(u64, Source)> {
        self.entries
            .iter()
            .find(|a| a.env_id == env_id)
            .map(|a| (a.agent_id, a.source))
    }
}

/// One-step-optimized weights keyed by `(agent_id, env_id)`.
pub type OneShotParams = BTreeMap<(u64, u64), PolicyParams>;

/// Episode seed shared by every agent scored on `env_id`.
fn column_seed(seed: Seed, env_id: u64) -> Seed {
    seed.derive("transfer-eval", &[env_id])
}

/// Cartesian product of agents and envs, evaluated in parallel.
pub fn zero_shot_scores(
    agents: &[(u64, &PolicyParams)],
    envs: &[(u64, &Level)],
    episodes: usize,
    seed: Seed,
    solver: &Solver,
) -> Result<ScoreMatrix> {
    if agents.is_empty() || envs.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let n = envs.len();
    let flat = solver.pool().map_range(agents.len() * n, |t| {
        let ((_, agent), (env_id, level)) = (agents[t / n], envs[t % n]);
        solver.evaluate(agent, level, episodes, column_seed(seed, env_id))
    })?;
    ScoreMatrix::new(
        flat.chunks(n).map(<[f64]>::to_vec).collect(),
        agents.iter().map(|a| a.0).collect(),
        envs.iter().map(|e| e.0).collect(),
    )
}

/// Scores after one optimizer step of each agent on each env specifically.
///
/// The evaluation seeds match [`zero_shot_scores`], so a zero step size
/// reproduces the zero-shot matrix exactly.
pub fn one_shot_scores(
    agents: &[(u64, &PolicyParams)],
    envs: &[(u64, &Level)],
    es: &EsConfig,
    episodes: usize,
    seed: Seed,
    solver: &Solver,
) -> Result<(ScoreMatrix, OneShotParams)> {
    if agents.is_empty() || envs.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let n = envs.len();
    let cells = solver.pool().map_range(agents.len() * n, |t| {
        let ((agent_id, agent), (env_id, level)) = (agents[t / n], envs[t % n]);
        let step_seed = seed.derive("transfer-step", &[agent_id, env_id]);
        let tuned = solver.optimize_step_with(agent, level, es, step_seed)?.new_params;
        let score = solver.evaluate(&tuned, level, episodes, column_seed(seed, env_id))?;
        Ok((score, tuned))
    })?;
    let mut table = OneShotParams::new();
    let mut scores = vec![Vec::with_capacity(n); agents.len()];
    for (t, (score, tuned)) in cells.into_iter().enumerate() {
        scores[t / n].push(score);
        table.insert((agents[t / n].0, envs[t % n].0), tuned);
    }
    let matrix = ScoreMatrix::new(scores, agents.iter().map(|a| a.0).collect(), envs.iter().map(|e| e.0).collect())?;
    Ok((matrix, table))
}

/// Column-wise argmax over the zero-shot matrix stacked on the optional
/// one-shot matrix. Ties go to the zero-shot entry, then the lowest row.
pub fn rank_argmax(zero: &ScoreMatrix, one: Option<&ScoreMatrix>) -> Result<TransferAssignment> {
    if zero.rows() == 0 || zero.cols() == 0 {
        return Err(Error::EmptyMatrix);
    }
    if let Some(one) = one {
        if one.env_ids != zero.env_ids {
            return Err(Error::MatrixShape("env ids"));
        }
        if one.agent_ids != zero.agent_ids {
            return Err(Error::MatrixShape("agent ids"));
        }
    }
    let stacked: Vec<(&ScoreMatrix, Source)> = std::iter::once((zero, Source::ZeroShot))
        .chain(one.map(|m| (m, Source::OneShot)))
        .collect();
    let entries = zero
        .env_ids
        .iter()
        .enumerate()
        .map(|(k, &env_id)| {
            let mut best: Option<(f64, u64, Source)> = None;
            for &(m, source) in &stacked {
                for (i, &agent_id) in m.agent_ids.iter().enumerate() {
                    let v = m.get(i, k);
                    if best.is_none_or(|(b, _, _)| v > b) {
                        best = Some((v, agent_id, source));
                    }
                }
            }
            let (_, agent_id, source) = best.expect("non-empty column");
            Assigned {
                env_id,
                agent_id,
                source,
            }
        })
        .collect();
    Ok(TransferAssignment { entries })
}

/// Installs each env's winning weights into that env's pair.
///
/// Weights are read from the archive as it was before the transfer, so
/// swaps between pairs behave like simultaneous assignment.
pub fn apply_transfer(
    archive: &[Pair],
    assignment: &TransferAssignment,
    one_shot: Option<&OneShotParams>,
) -> Result<Vec<Pair>> {
    archive
        .iter()
        .map(|pair| {
            let env = pair.id.0;
            let (agent_id, source) = assignment.get(env).ok_or(Error::Unassigned(env))?;
            let agent = match source {
                Source::ZeroShot => archive
                    .iter()
                    .find(|p| p.id.0 == agent_id)
                    .map(|p| p.agent.clone())
                    .ok_or(Error::UnknownAgent(agent_id))?,
                Source::OneShot => one_shot
                    .and_then(|t| t.get(&(agent_id, env)))
                    .cloned()
                    .ok_or(Error::MissingOneShot { agent: agent_id, env })?,
            };
            Ok(Pair {
                agent,
                ..pair.clone()
            })
        })
        .collect()
}
