use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by challenge handling, training, and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty data set")]
    EmptyData,

    #[error("model weight vector has zero norm")]
    ZeroNormModel,

    #[error(
        "target distance {target:.6} outside the attainable range [{lo:.6}, {hi:.6}] \
         for this weight vector"
    )]
    UnreachableTarget { target: f64, lo: f64, hi: f64 },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("unknown reproduction target {0:?}")]
    UnknownTarget(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
