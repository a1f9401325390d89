use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    /// The projected vector is too close to zero to be turned into a
    /// quantum state.
    #[error("degenerate state{}: norm {norm:e} is below the encodable threshold", sample_suffix(*.sample))]
    DegenerateState { norm: f64, sample: Option<usize> },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_diagonal:e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },

    #[error("qubit index {index} out of range for a {n}-qubit register")]
    QubitIndex { index: usize, n: usize },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("format error: {0}")]
    Format(String),

    /// An activation overflowed or became NaN inside the model.
    #[error("non-finite activation in {0}")]
    NonFinite(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("training diverged at epoch {epoch}: train MSE is {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("checkpoint: bad magic string")]
    BadMagic,

    #[error("checkpoint: format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("checkpoint: file truncated while reading {0}")]
    Truncated(String),

    #[error("checkpoint: shape mismatch for {what}: declared {declared}, parameters have {actual}")]
    ShapeMismatch {
        what: String,
        declared: usize,
        actual: usize,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn sample_suffix(sample: Option<usize>) -> String {
    match sample {
        Some(i) => format!(" in sample {i}"),
        None => String::new(),
    }
}

impl Error {
    /// Attach a sample index to a degenerate-state error.
    pub fn for_sample(self, index: usize) -> Self {
        match self {
            Error::DegenerateState { norm, .. } => Error::DegenerateState {
                norm,
                sample: Some(index),
            },
            other => other,
        }
    }
}
