use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("arc length must be non-negative, got {0}")]
    NegativeArcLength(f64),

    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("dangling {kind} reference: {id}")]
    DanglingReference { kind: &'static str, id: String },

    #[error("obstacle {obstacle_id}: duplicate timestamp {timestamp}")]
    DuplicateTimestamp { obstacle_id: String, timestamp: f64 },

    /// A value outside the range its owner declares. Maps to the usage exit code.
    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("insufficient coverage: need data up to t={needed}, track ends at t={available}")]
    InsufficientCoverage { needed: f64, available: f64 },

    #[error("obstacle {obstacle_id} does not associate with any lane")]
    NoAssociation { obstacle_id: String },

    #[error("intention {intention_id} has a prior but no candidate trajectories")]
    NoCandidates { intention_id: String },

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("sequence length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("time grids do not align at index {index}: {left} vs {right}")]
    GridMismatch { index: usize, left: f64, right: f64 },

    #[error("duplicate record key ({obstacle_id}, {anchor_time})")]
    KeyCollision { obstacle_id: String, anchor_time: f64 },

    #[error("non-finite loss at iteration {iteration}")]
    NonFiniteLoss { iteration: usize },

    #[error("no tuning examples")]
    NoTuningExamples,
}

impl Error {
    pub(crate) fn parse(file: impl Into<String>, line: usize, message: impl ToString) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            message: message.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for validation failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidValue(_) => 2,
            _ => 1,
        }
    }
}
