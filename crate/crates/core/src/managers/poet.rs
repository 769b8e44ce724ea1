use serde::{Deserialize, Serialize};

use super::{CheckpointEvent, CheckpointPolicy, Pair, PairId};
use super::checkpoint::{save_checkpoint, Checkpoint, CheckpointState};
use crate::error::{Error, Result};
use crate::evolution::{evolution_step, EvolutionConfig, EvolutionStepReport, StepContext};
use crate::generators::{DirectGenome, GenomeId};
use crate::maze::{solvable, Level, DEFAULT_HORIZON};
use crate::runtime::log::{EventKind, RunLog};
use crate::runtime::pool::WorkerPool;
use crate::runtime::seed::Seed;
use crate::solvers::{Arch, EsConfig, PolicyParams, Solver};
use crate::transfer::{apply_transfer, one_shot_scores, rank_argmax, zero_shot_scores, Assigned};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferKind {
    ZeroShot,
    ZeroPlusOneShot,
}

fn default_transfer_kind() -> TransferKind {
    TransferKind::ZeroShot
}

fn default_horizon() -> usize {
    DEFAULT_HORIZON
}

fn default_eval_episodes() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoetConfig {
    pub total_loops: u64,
    pub evolve_every: u64,
    pub transfer_every: u64,
    pub optimize_steps_per_loop: usize,
    #[serde(default)]
    pub es: EsConfig,
    pub evolution: EvolutionConfig,
    #[serde(default = "default_transfer_kind")]
    pub transfer_kind: TransferKind,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    /// Episodes behind every logged return and transfer score.
    #[serde(default = "default_eval_episodes")]
    pub eval_episodes: usize,
}

impl PoetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.evolve_every == 0 || self.transfer_every == 0 || self.optimize_steps_per_loop == 0 {
            return Err(Error::Config(
                "evolve_every, transfer_every and optimize_steps_per_loop must be at least 1".into(),
            ));
        }
        if self.eval_episodes == 0 {
            return Err(Error::Config("eval_episodes must be positive".into()));
        }
        self.es.validate()?;
        self.evolution.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoetState {
    pub archive: Vec<Pair>,
    pub next_id: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeEvent {
    pub pair_id: u64,
    pub env_id: u64,
    pub steps: usize,
    pub steps_optimized: u64,
    pub mean_fitness: f64,
    pub best_fitness: f64,
    pub eval_return: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveEvent {
    #[serde(flatten)]
    pub report: EvolutionStepReport,
    pub population: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferEvent {
    pub kind: TransferKind,
    pub assignment: Vec<Assigned>,
    /// Envs whose agent was replaced.
    pub changed: Vec<u64>,
}

/// Archive coevolution: periodically evolve new environments, optimize
/// every pair on its own environment, periodically transfer agents.
#[derive(Debug, Clone)]
pub struct PoetManager {
    cfg: PoetConfig,
    solver: Solver,
    seed: Seed,
    loop_idx: u64,
    state: PoetState,
}

impl PoetManager {
    pub fn new(cfg: PoetConfig, seed_level: Level, seed: Seed, pool: WorkerPool) -> Result<Self> {
        cfg.validate()?;
        if !solvable(&seed_level) {
            return Err(Error::Config("seed level must be solvable".into()));
        }
        let pair = Pair {
            id: PairId(0),
            genome: DirectGenome::seed(seed_level, GenomeId(0), 0)?,
            agent: PolicyParams::random(Arch::agent(), seed.derive("init-agent", &[])),
            birth_loop: 0,
            steps_optimized: 0,
        };
        let solver = Solver::new(cfg.es.clone(), cfg.horizon, pool)?;
        Ok(PoetManager {
            cfg,
            solver,
            seed,
            loop_idx: 0,
            state: PoetState {
                archive: vec![pair],
                next_id: 1,
            },
        })
    }

    pub fn restore(cfg: PoetConfig, ckpt: &Checkpoint, pool: WorkerPool) -> Result<Self> {
        cfg.validate()?;
        let CheckpointState::Poet(state) = &ckpt.state else {
            return Err(Error::Config("checkpoint does not hold an archive".into()));
        };
        let solver = Solver::new(cfg.es.clone(), cfg.horizon, pool)?;
        Ok(PoetManager {
            cfg,
            solver,
            seed: ckpt.seed,
            loop_idx: ckpt.loop_idx,
            state: state.clone(),
        })
    }

    pub fn archive(&self) -> &[Pair] {
        &self.state.archive
    }

    pub fn loop_idx(&self) -> u64 {
        self.loop_idx
    }

    pub fn next_id(&self) -> u64 {
        self.state.next_id
    }

    pub fn config(&self) -> &PoetConfig {
        &self.cfg
    }

    pub fn solver(&self) -> &Solver {
        &self.solver
    }

    pub fn run(&mut self, log: &mut RunLog, checkpoints: Option<&CheckpointPolicy>) -> Result<()> {
        while self.loop_idx < self.cfg.total_loops {
            self.step_loop(log)?;
            if let Some(policy) = checkpoints.filter(|p| p.due(self.loop_idx)) {
                self.write_checkpoint(policy, log)?;
            }
        }
        Ok(())
    }

    pub fn step_loop(&mut self, log: &mut RunLog) -> Result<()> {
        let l = self.loop_idx + 1;
        let base = self.seed.derive("loop", &[l]);

        if l.is_multiple_of(self.cfg.evolve_every) {
            let ctx = StepContext {
                solver: &self.solver,
                loop_idx: l,
                seed: base.derive("evolve", &[]),
                next_id: self.state.next_id,
            };
            let (archive, report, next_id) = evolution_step(&self.state.archive, &self.cfg.evolution, ctx)?;
            self.state.archive = archive;
            self.state.next_id = next_id;
            let population = self.state.archive.iter().map(|p| p.id.0).collect();
            log.record(l, EventKind::Evolve, &EvolveEvent { report, population })?;
        }

        for pair in &mut self.state.archive {
            let level = pair.genome.level();
            let mut last = None;
            for j in 0..self.cfg.optimize_steps_per_loop {
                let step = self.solver.optimize_step(&pair.agent, level, base.derive("optimize", &[pair.id.0, j as u64]))?;
                pair.agent = step.new_params.clone();
                pair.steps_optimized += 1;
                last = Some(step);
            }
            let last = last.expect("at least one step per loop");
            let eval_return =
                self.solver.evaluate(&pair.agent, level, self.cfg.eval_episodes, base.derive("eval", &[pair.id.0]))?;
            let event = OptimizeEvent {
                pair_id: pair.id.0,
                env_id: pair.genome.id().0,
                steps: self.cfg.optimize_steps_per_loop,
                steps_optimized: pair.steps_optimized,
                mean_fitness: last.mean_fitness,
                best_fitness: last.best_fitness,
                eval_return,
            };
            log.record(l, EventKind::Optimize, &event)?;
        }

        if l.is_multiple_of(self.cfg.transfer_every) {
            let event = self.transfer(base.derive("transfer", &[]))?;
            log.record(l, EventKind::Transfer, &event)?;
        }
        self.loop_idx = l;
        Ok(())
    }

    fn transfer(&mut self, seed: Seed) -> Result<TransferEvent> {
        let archive = &self.state.archive;
        let agents: Vec<(u64, &PolicyParams)> = archive.iter().map(|p| (p.id.0, &p.agent)).collect();
        let envs: Vec<(u64, &Level)> = archive.iter().map(|p| (p.id.0, p.genome.level())).collect();
        let episodes = self.cfg.eval_episodes;
        let zero = zero_shot_scores(&agents, &envs, episodes, seed, &self.solver)?;
        let (assignment, next) = match self.cfg.transfer_kind {
            TransferKind::ZeroShot => {
                let a = rank_argmax(&zero, None)?;
                let next = apply_transfer(archive, &a, None)?;
                (a, next)
            }
            TransferKind::ZeroPlusOneShot => {
                let (one, tuned) = one_shot_scores(&agents, &envs, &self.cfg.es, episodes, seed, &self.solver)?;
                let a = rank_argmax(&zero, Some(&one))?;
                let next = apply_transfer(archive, &a, Some(&tuned))?;
                (a, next)
            }
        };
        let changed = next
            .iter()
            .zip(archive)
            .filter(|(a, b)| a.agent != b.agent)
            .map(|(a, _)| a.id.0)
            .collect();
        self.state.archive = next;
        Ok(TransferEvent {
            kind: self.cfg.transfer_kind,
            assignment: assignment.entries,
            changed,
        })
    }

    fn write_checkpoint(&self, policy: &CheckpointPolicy, log: &mut RunLog) -> Result<()> {
        let file = CheckpointPolicy::file_name(self.loop_idx);
        let ckpt = Checkpoint {
            seed: self.seed,
            loop_idx: self.loop_idx,
            // the checkpoint's own log record is part of the restored prefix
            log_next_seq: log.next_seq() + 1,
            config_digest: policy.config_digest.clone(),
            config: policy.config.clone(),
            state: CheckpointState::Poet(self.state.clone()),
        };
        let digest = save_checkpoint(&policy.dir.join(&file), &ckpt)?;
        log.record(self.loop_idx, EventKind::Checkpoint, &CheckpointEvent { file, digest })
    }
}

/// Runs a whole experiment in memory.
pub fn poet_run(cfg: PoetConfig, seed_level: Level, seed: Seed, pool: WorkerPool) -> Result<(Vec<Pair>, RunLog)> {
    let mut manager = PoetManager::new(cfg, seed_level, seed, pool)?;
    let mut log = RunLog::in_memory();
    manager.run(&mut log, None)?;
    Ok((manager.state.archive, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::MutationConfig;
    use crate::maze::{open_room, Pos};
    use crate::validators::ValidatorKind;

    pub(crate) fn small_cfg(total_loops: u64, e: u64, tr: u64) -> PoetConfig {
        PoetConfig {
            total_loops,
            evolve_every: e,
            transfer_every: tr,
            optimize_steps_per_loop: 1,
            es: EsConfig {
                pop_size: 8,
                episodes_per_eval: 1,
                ..EsConfig::default()
            },
            evolution: EvolutionConfig {
                parents_per_step: 1,
                children_per_parent: 2,
                max_population: 3,
                mutation: MutationConfig::default(),
                validator: ValidatorKind::Solvability {},
            },
            transfer_kind: TransferKind::ZeroShot,
            horizon: 60,
            eval_episodes: 1,
        }
    }

    fn room() -> Level {
        open_room(8, 8, Pos::new(1, 1), Pos::new(4, 1)).unwrap()
    }

    #[test]
    fn single_loop_only_optimizes() {
        let (archive, log) = poet_run(small_cfg(1, 2, 2), room(), Seed(1), WorkerPool::serial()).unwrap();
        let kinds: Vec<EventKind> = log.records().iter().map(|r| r.kind).collect();
        assert_eq!(kinds, vec![EventKind::Optimize]);
        assert_eq!(archive.len(), 1);
        assert_eq!(archive[0].steps_optimized, 1);
    }

    #[test]
    fn schedule_follows_periods() {
        let (_, log) = poet_run(small_cfg(6, 2, 3), room(), Seed(2), WorkerPool::serial()).unwrap();
        for r in log.records() {
            match r.kind {
                EventKind::Evolve => assert_eq!(r.loop_idx % 2, 0),
                EventKind::Transfer => assert_eq!(r.loop_idx % 3, 0),
                EventKind::Optimize => {
                    assert_eq!(r.payload["pair_id"], r.payload["env_id"]);
                }
                other => panic!("unexpected {other:?}"),
            }
        }
        let count = |k| log.records().iter().filter(|r| r.kind == k).count();
        assert_eq!((count(EventKind::Evolve), count(EventKind::Transfer)), (3, 2));
    }

    #[test]
    fn unsolvable_seed_is_rejected() {
        let shut = Level::parse("#######\n#S....#\n#..#..#\n#.#G#.#\n#..#..#\n#######\n").unwrap();
        assert!(PoetManager::new(small_cfg(1, 1, 1), shut, Seed(0), WorkerPool::serial()).is_err());
    }

    #[test]
    fn one_shot_transfer_runs() {
        let mut cfg = small_cfg(4, 1, 2);
        cfg.transfer_kind = TransferKind::ZeroPlusOneShot;
        let (archive, log) = poet_run(cfg, room(), Seed(3), WorkerPool::serial()).unwrap();
        assert!(archive.len() > 1);
        assert!(log.records().iter().any(|r| r.kind == EventKind::Transfer));
    }
}
