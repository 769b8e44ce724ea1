use serde::{Deserialize, Serialize};

use super::checkpoint::{save_checkpoint, Checkpoint, CheckpointState};
use super::{CheckpointEvent, CheckpointPolicy};
use crate::error::{Error, Result};
use crate::generators::{default_budget, PlacementMode, SeqGenParams};
use crate::maze::{solvable, Level, DEFAULT_HORIZON};
use crate::runtime::log::{EventKind, RunLog};
use crate::runtime::pool::WorkerPool;
use crate::runtime::seed::Seed;
use crate::solvers::{es_step, Arch, EsConfig, PolicyParams, Solver};
use crate::validators::regret;

/// Networks are updated one after another within a generation, in this order.
pub const UPDATE_ORDER: [&str; 3] = ["adversary", "antagonist", "protagonist"];

fn default_hidden() -> Vec<usize> {
    vec![32]
}

fn default_horizon() -> usize {
    DEFAULT_HORIZON
}

fn default_episodes() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairedConfig {
    pub generations: u64,
    pub canvas: (usize, usize),
    /// Placements per decoded level; half the canvas area when absent.
    #[serde(default)]
    pub placement_budget: Option<usize>,
    #[serde(default = "default_hidden")]
    pub adversary_hidden: Vec<usize>,
    #[serde(default)]
    pub es: EsConfig,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    /// Episodes behind each regret estimate.
    #[serde(default = "default_episodes")]
    pub episodes: usize,
    #[serde(default)]
    pub freeze_adversary: bool,
    #[serde(default)]
    pub freeze_antagonist: bool,
    #[serde(default)]
    pub freeze_protagonist: bool,
    /// Replaces the adversary's level; the adversary is then not trained.
    #[serde(default)]
    pub fixed_level: Option<Level>,
}

impl PairedConfig {
    pub fn budget(&self) -> usize {
        self.placement_budget
            .unwrap_or_else(|| default_budget(self.canvas.0, self.canvas.1))
    }

    pub fn validate(&self) -> Result<()> {
        Level::canvas(self.canvas.0, self.canvas.1)?;
        if self.episodes == 0 {
            return Err(Error::Config("paired episodes must be positive".into()));
        }
        self.es.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedState {
    pub adversary: SeqGenParams,
    pub antagonist: PolicyParams,
    pub protagonist: PolicyParams,
    pub generation: u64,
}

impl PairedState {
    pub fn validate(&self) -> Result<()> {
        self.adversary.validate()?;
        for p in [&self.antagonist, &self.protagonist] {
            if p.arch != Arch::agent() {
                return Err(Error::DimensionMismatch {
                    expected: Arch::agent().param_count(),
                    got: p.dim(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedGeneration {
    pub generation: u64,
    pub order: Vec<String>,
    pub level: Level,
    /// Exactly one start and one goal were placed.
    pub level_valid: bool,
    pub level_solvable: bool,
    pub antagonist_return: f64,
    pub protagonist_return: f64,
    pub regret: f64,
}

/// Regret-driven environment design with three networks, all trained by
/// the gradient-free optimizer.
#[derive(Debug, Clone)]
pub struct PairedManager {
    cfg: PairedConfig,
    solver: Solver,
    seed: Seed,
    state: PairedState,
}

impl PairedManager {
    /// Fresh random networks; the adversary decodes in relaxed mode.
    pub fn new(cfg: PairedConfig, seed: Seed, pool: WorkerPool) -> Result<Self> {
        cfg.validate()?;
        let state = PairedState {
            adversary: SeqGenParams::random(
                cfg.canvas,
                cfg.budget(),
                &cfg.adversary_hidden,
                PlacementMode::Relaxed,
                seed.derive("init-adversary", &[]),
            )?,
            antagonist: PolicyParams::random(Arch::agent(), seed.derive("init-antagonist", &[])),
            protagonist: PolicyParams::random(Arch::agent(), seed.derive("init-protagonist", &[])),
            generation: 0,
        };
        Self::with_state(cfg, state, seed, pool)
    }

    pub fn with_state(cfg: PairedConfig, state: PairedState, seed: Seed, pool: WorkerPool) -> Result<Self> {
        cfg.validate()?;
        state.validate()?;
        let solver = Solver::new(cfg.es.clone(), cfg.horizon, pool)?;
        Ok(PairedManager { cfg, solver, seed, state })
    }

    pub fn restore(cfg: PairedConfig, ckpt: &Checkpoint, pool: WorkerPool) -> Result<Self> {
        let CheckpointState::Paired(state) = &ckpt.state else {
            return Err(Error::Config("checkpoint does not hold a paired state".into()));
        };
        Self::with_state(cfg, state.clone(), ckpt.seed, pool)
    }

    pub fn state(&self) -> &PairedState {
        &self.state
    }

    pub fn run(&mut self, log: &mut RunLog, checkpoints: Option<&CheckpointPolicy>) -> Result<()> {
        while self.state.generation < self.cfg.generations {
            self.step_generation(log)?;
            if let Some(policy) = checkpoints.filter(|p| p.due(self.state.generation)) {
                self.write_checkpoint(policy, log)?;
            }
        }
        Ok(())
    }

    fn regret_on(&self, level: &Level, seed: Seed) -> Result<(f64, f64)> {
        let a = self.solver.evaluate(&self.state.antagonist, level, self.cfg.episodes, seed)?;
        let p = self.solver.evaluate(&self.state.protagonist, level, self.cfg.episodes, seed)?;
        Ok((a, p))
    }

    pub fn step_generation(&mut self, log: &mut RunLog) -> Result<PairedGeneration> {
        let g = self.state.generation + 1;
        let base = self.seed.derive("generation", &[g]);
        let noise = base.derive("decode", &[]);
        let eval_seed = base.derive("regret-episodes", &[]);

        let level = match &self.cfg.fixed_level {
            Some(level) => level.clone(),
            None => self.state.adversary.decode_level(noise),
        };
        let (antagonist_return, protagonist_return) = self.regret_on(&level, eval_seed)?;

        if !self.cfg.freeze_adversary && self.cfg.fixed_level.is_none() {
            let adversary = &self.state.adversary;
            let step = es_step(
                adversary.net.weights(),
                &self.cfg.es,
                base.derive("adversary-step", &[]),
                self.solver.pool(),
                |_, w| {
                    let candidate = adversary.with_weights(w.to_vec())?;
                    let (a, p) = self.regret_on(&candidate.decode_level(noise), eval_seed)?;
                    Ok(regret(a, p))
                },
            )?;
            self.state.adversary = self.state.adversary.with_weights(step.theta)?;
        }
        if !self.cfg.freeze_antagonist {
            let step = self.solver.optimize_step(&self.state.antagonist, &level, base.derive("antagonist-step", &[]))?;
            self.state.antagonist = step.new_params;
        }
        if !self.cfg.freeze_protagonist {
            let step = self.solver.optimize_step(&self.state.protagonist, &level, base.derive("protagonist-step", &[]))?;
            self.state.protagonist = step.new_params;
        }

        let record = PairedGeneration {
            generation: g,
            order: UPDATE_ORDER.iter().map(|s| s.to_string()).collect(),
            level_valid: level.is_complete(),
            level_solvable: solvable(&level),
            antagonist_return,
            protagonist_return,
            regret: regret(antagonist_return, protagonist_return),
            level,
        };
        log.record(g, EventKind::PairedGeneration, &record)?;
        self.state.generation = g;
        Ok(record)
    }

    fn write_checkpoint(&self, policy: &CheckpointPolicy, log: &mut RunLog) -> Result<()> {
        let g = self.state.generation;
        let file = CheckpointPolicy::file_name(g);
        let ckpt = Checkpoint {
            seed: self.seed,
            loop_idx: g,
            log_next_seq: log.next_seq() + 1,
            config_digest: policy.config_digest.clone(),
            config: policy.config.clone(),
            state: CheckpointState::Paired(self.state.clone()),
        };
        let digest = save_checkpoint(&policy.dir.join(&file), &ckpt)?;
        log.record(g, EventKind::Checkpoint, &CheckpointEvent { file, digest })
    }
}

/// Runs the configured number of generations in memory.
pub fn paired_run(cfg: PairedConfig, seed: Seed, pool: WorkerPool) -> Result<(PairedState, RunLog)> {
    let mut manager = PairedManager::new(cfg, seed, pool)?;
    let mut log = RunLog::in_memory();
    manager.run(&mut log, None)?;
    Ok((manager.state, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maze::{open_room, Pos};

    fn cfg(generations: u64) -> PairedConfig {
        PairedConfig {
            generations,
            canvas: (6, 6),
            placement_budget: None,
            adversary_hidden: vec![8],
            es: EsConfig {
                pop_size: 4,
                episodes_per_eval: 1,
                ..EsConfig::default()
            },
            horizon: 100,
            episodes: 1,
            freeze_adversary: false,
            freeze_antagonist: false,
            freeze_protagonist: false,
            fixed_level: None,
        }
    }

    #[test]
    fn zero_generations_change_nothing() {
        let m = PairedManager::new(cfg(0), Seed(1), WorkerPool::serial()).unwrap();
        let before = m.state().clone();
        let (after, log) = paired_run(cfg(0), Seed(1), WorkerPool::serial()).unwrap();
        assert_eq!(after, before);
        assert!(log.records().is_empty());
    }

    #[test]
    fn noop_adversary_gives_zero_regret() {
        let c = PairedConfig { freeze_adversary: true, ..cfg(3) };
        let mut m = PairedManager::new(c.clone(), Seed(2), WorkerPool::serial()).unwrap();
        let state = PairedState {
            adversary: SeqGenParams::always_noop(c.canvas, c.budget(), &c.adversary_hidden, PlacementMode::Relaxed).unwrap(),
            ..m.state().clone()
        };
        m = PairedManager::with_state(c, state, Seed(2), WorkerPool::serial()).unwrap();
        let mut log = RunLog::in_memory();
        m.run(&mut log, None).unwrap();
        assert_eq!(log.records().len(), 3);
        for r in log.records() {
            assert_eq!(r.payload["level_valid"], false);
            assert_eq!(r.payload["regret"], 0.0);
            assert_eq!(r.payload["antagonist_return"], 0.0);
            assert_eq!(r.payload["protagonist_return"], 0.0);
        }
    }

    #[test]
    fn trained_generations_log_order_and_stay_finite() {
        let (state, log) = paired_run(cfg(2), Seed(3), WorkerPool::serial()).unwrap();
        assert_eq!(state.generation, 2);
        assert!(state.adversary.net.weights().iter().all(|w| w.is_finite()));
        assert_eq!(log.records()[0].payload["order"], serde_json::json!(UPDATE_ORDER));
    }

    #[test]
    fn fixed_level_is_used() {
        let level = open_room(6, 6, Pos::new(1, 1), Pos::new(4, 4)).unwrap();
        let c = PairedConfig { fixed_level: Some(level.clone()), ..cfg(1) };
        let (_, log) = paired_run(c, Seed(4), WorkerPool::serial()).unwrap();
        assert_eq!(log.records()[0].payload["level"], serde_json::json!(level.render()));
    }
}
