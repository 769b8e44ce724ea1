//! Building blocks for open-ended coevolution of agents and gridworld mazes.
//!
//! The crate is split the same way an open-ended learning system is:
//!
//! - [`maze`]: the environment, a deterministic gridworld with a sparse,
//!   time-decayed goal reward and a reachability oracle.
//! - [`generators`]: things that produce levels, either a directly encoded
//!   mutable tile map or a neural sequential-placement adversary.
//! - [`solvers`]: a small stochastic policy and an evolution-strategy
//!   optimizer exposing `evaluate` and `optimize_step`.
//! - [`validators`]: minimal criteria deciding which candidate levels enter
//!   the population.
//! - [`transfer`]: score matrices and argmax ranking for moving agents
//!   between environments.
//! - [`evolution`]: parent selection, mutation, admission and culling.
//! - [`managers`]: the two reference assemblies (archive coevolution and
//!   regret-driven adversarial design) plus checkpointing.
//! - [`runtime`]: seeds, the worker pool, run logs, configuration and
//!   log analysis.

pub mod error;
pub mod evolution;
pub mod generators;
pub mod managers;
pub mod maze;
pub mod runtime;
pub mod solvers;
pub mod transfer;
pub mod validators;

mod codec;

pub use error::{Error, Result};
pub use maze::{EpisodeResult, Level, LevelError, Pos, Tile};
pub use runtime::pool::WorkerPool;
pub use solvers::{EsConfig, PolicyParams};
