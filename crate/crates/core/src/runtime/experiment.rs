//! Runs a configured experiment into an output directory:
//!
//! - `run.jsonl`: the deterministic event log
//! - `timing.jsonl`: wall-clock times per log record
//! - `checkpoints/ckpt-NNNNNN.json`: periodic checkpoints
//! - `final.json`: the final archive or network state, in checkpoint form

use std::path::{Path, PathBuf};

use super::config::{Algorithm, ExperimentConfig};
use super::log::{EventKind, RunLog, RunStart, LOG_FILE, SCHEMA_VERSION};
use super::pool::WorkerPool;
use super::seed::Seed;
use crate::error::{Error, Result};
use crate::managers::{
    load_checkpoint, save_checkpoint, Checkpoint, CheckpointPolicy, CheckpointState, PairedManager, PoetManager,
};

pub const FINAL_FILE: &str = "final.json";
pub const CHECKPOINT_DIR: &str = "checkpoints";

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub log_path: PathBuf,
    pub final_path: PathBuf,
    pub loops: u64,
    pub records: u64,
}

enum Manager {
    Poet(PoetManager),
    Paired(PairedManager),
}

impl Manager {
    fn run(&mut self, log: &mut RunLog, policy: Option<&CheckpointPolicy>) -> Result<()> {
        match self {
            Manager::Poet(m) => m.run(log, policy),
            Manager::Paired(m) => m.run(log, policy),
        }
    }

    fn progress(&self) -> u64 {
        match self {
            Manager::Poet(m) => m.loop_idx(),
            Manager::Paired(m) => m.state().generation,
        }
    }

    fn state(&self) -> CheckpointState {
        match self {
            Manager::Poet(m) => CheckpointState::Poet(crate::managers::PoetState {
                archive: m.archive().to_vec(),
                next_id: m.next_id(),
            }),
            Manager::Paired(m) => CheckpointState::Paired(m.state().clone()),
        }
    }
}

fn policy(cfg: &ExperimentConfig, out: &Path) -> Result<Option<CheckpointPolicy>> {
    if cfg.checkpoint_every == 0 {
        return Ok(None);
    }
    Ok(Some(CheckpointPolicy {
        dir: out.join(CHECKPOINT_DIR),
        every: cfg.checkpoint_every,
        config_digest: cfg.digest()?,
        config: cfg.snapshot()?,
    }))
}

fn finish(cfg: &ExperimentConfig, out: &Path, manager: &mut Manager, mut log: RunLog) -> Result<RunOutcome> {
    let policy = policy(cfg, out)?;
    manager.run(&mut log, policy.as_ref())?;
    let final_path = out.join(FINAL_FILE);
    let ckpt = Checkpoint {
        seed: Seed(cfg.seed),
        loop_idx: manager.progress(),
        log_next_seq: log.next_seq(),
        config_digest: cfg.digest()?,
        config: cfg.snapshot()?,
        state: manager.state(),
    };
    save_checkpoint(&final_path, &ckpt)?;
    Ok(RunOutcome {
        log_path: out.join(LOG_FILE),
        final_path,
        loops: manager.progress(),
        records: log.next_seq(),
    })
}

/// Starts a fresh run, replacing any log already in `out`.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    cfg.validate()?;
    let pool = WorkerPool::new(cfg.workers)?;
    let seed = Seed(cfg.seed);
    let mut manager = match cfg.algorithm {
        Algorithm::Poet | Algorithm::Pinsky => {
            Manager::Poet(PoetManager::new(cfg.poet_config()?, cfg.seed_level()?, seed, pool)?)
        }
        Algorithm::Paired => Manager::Paired(PairedManager::new(cfg.paired_config()?, seed, pool)?),
    };
    let mut log = RunLog::create(out, cfg.workers)?;
    let start = RunStart {
        schema_version: SCHEMA_VERSION,
        config_digest: cfg.digest()?,
        algorithm: cfg.algorithm.as_str().into(),
        seed: cfg.seed,
    };
    log.record(0, EventKind::RunStart, &start)?;
    finish(cfg, out, &mut manager, log)
}

/// Continues a run from one of its checkpoints. The log in `out` is cut
/// back to the checkpoint and extended from there.
pub fn resume_experiment(cfg: &ExperimentConfig, checkpoint: &Path, out: &Path) -> Result<RunOutcome> {
    cfg.validate()?;
    let ckpt = load_checkpoint(checkpoint, Some(&cfg.digest()?))?;
    if ckpt.seed != Seed(cfg.seed) {
        return Err(Error::Config("checkpoint seed differs from the configuration".into()));
    }
    let pool = WorkerPool::new(cfg.workers)?;
    let mut manager = match cfg.algorithm {
        Algorithm::Poet | Algorithm::Pinsky => Manager::Poet(PoetManager::restore(cfg.poet_config()?, &ckpt, pool)?),
        Algorithm::Paired => Manager::Paired(PairedManager::restore(cfg.paired_config()?, &ckpt, pool)?),
    };
    let log = RunLog::resume(out, ckpt.log_next_seq, cfg.workers)?;
    finish(cfg, out, &mut manager, log)
}
