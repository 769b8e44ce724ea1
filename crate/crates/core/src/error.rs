use std::path::PathBuf;

use crate::maze::LevelError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Level(#[from] LevelError),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite fitness {value} for candidate {candidate}")]
    NonFiniteFitness { candidate: usize, value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("population is empty")]
    EmptyPopulation,

    #[error("score matrix is empty")]
    EmptyMatrix,

    #[error("score matrices do not share {0}")]
    MatrixShape(&'static str),

    #[error("assignment does not cover env {0}")]
    Unassigned(u64),

    #[error("unknown agent {0} in assignment")]
    UnknownAgent(u64),

    #[error("missing one-shot parameters for agent {agent} on env {env}")]
    MissingOneShot { agent: u64, env: u64 },

    #[error("task {index} failed: {source}")]
    Task {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("task {index} panicked: {message}")]
    Panic { index: usize, message: String },

    #[error("checkpoint integrity check failed: {0}")]
    Integrity(String),

    #[error("config digest {found} does not match checkpoint {expected}")]
    ConfigMismatch { expected: String, found: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("malformed record: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Innermost error beneath any task wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Task { source, .. } => source.root(),
            other => other,
        }
    }

    /// Stable snake_case name of the variant, for structured reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Level(_) => "level",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NonFiniteFitness { .. } => "non_finite_fitness",
            Error::Config(_) => "config",
            Error::EmptyPopulation => "empty_population",
            Error::EmptyMatrix => "empty_matrix",
            Error::MatrixShape(_) => "matrix_shape",
            Error::Unassigned(_) => "unassigned",
            Error::UnknownAgent(_) => "unknown_agent",
            Error::MissingOneShot { .. } => "missing_one_shot",
            Error::Task { .. } => "task",
            Error::Panic { .. } => "panic",
            Error::Integrity(_) => "integrity",
            Error::ConfigMismatch { .. } => "config_mismatch",
            Error::Schema(_) => "schema",
            Error::Format(_) => "format",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
