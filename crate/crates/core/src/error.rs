use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value: {0}")]
    NonFinite(&'static str),

    #[error("target coincides with the observer position")]
    CoincidentPoints,

    #[error("invalid agent id {0}")]
    InvalidAgentId(u32),

    #[error("the swarm leader has no formation waypoint or temporary leader")]
    LeaderHasNoLeader,

    #[error("obstacle count must be at least 1, got {0}")]
    InvalidObstacleCount(usize),

    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("cost matrix is not square ({rows} rows, row {row} has {cols} columns)")]
    NotSquare {
        rows: usize,
        row: usize,
        cols: usize,
    },

    #[error("exhaustive assignment is limited to n <= {max}, got {n}")]
    TooLargeForExhaustive { n: usize, max: usize },

    #[error("invalid anneal schedule: {0}")]
    InvalidSchedule(&'static str),

    #[error("sinkhorn normalization did not converge at temperature {temperature} after {iterations} iterations")]
    SinkhornDiverged { temperature: f64, iterations: usize },

    #[error("thin-plate spline control points are degenerate (collinear)")]
    DegenerateControlPoints,

    #[error("invalid scenario: `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("failed to parse scenario {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
