//! Algorithm assemblies. Managers own scheduling, logging and checkpoints;
//! every decision is delegated to the component modules.

mod checkpoint;
mod paired;
mod poet;

pub use checkpoint::{load_checkpoint, save_checkpoint, sha256_hex, Checkpoint, CheckpointState, CHECKPOINT_SCHEMA};
pub use paired::{paired_run, PairedConfig, PairedGeneration, PairedManager, PairedState, UPDATE_ORDER};
pub use poet::{poet_run, OptimizeEvent, PoetConfig, PoetManager, PoetState, TransferEvent, TransferKind};

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::generators::DirectGenome;
use crate::solvers::PolicyParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PairId(pub u64);

/// One archive entry: an agent bound to the environment it trains on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pair {
    pub id: PairId,
    pub genome: DirectGenome,
    pub agent: PolicyParams,
    pub birth_loop: u64,
    pub steps_optimized: u64,
}

/// Where and how often a manager writes checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointPolicy {
    pub dir: PathBuf,
    pub every: u64,
    pub config_digest: String,
    pub config: serde_json::Value,
}

impl CheckpointPolicy {
    pub fn file_name(loop_idx: u64) -> String {
        format!("ckpt-{loop_idx:06}.json")
    }

    fn due(&self, loop_idx: u64) -> bool {
        self.every > 0 && loop_idx.is_multiple_of(self.every)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointEvent {
    pub file: String,
    pub digest: String,
}
