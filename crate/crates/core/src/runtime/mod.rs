//! Run plumbing: seeds, the worker pool, logs, configuration and replay.

pub mod config;
pub mod experiment;
pub mod log;
pub mod pool;
pub mod replay;
pub mod seed;
