use std::io;

use crate::sps::TraceRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("index {index} out of range for {len} samples")]
    Index { index: usize, len: usize },

    #[error("iteration counter must start at 1, got {0}")]
    InvalidIteration(usize),

    /// The iterate blew up. `last_finite` is the last iteration whose iterate
    /// was finite and bounded; `trace` holds everything recorded before that.
    #[error("solver diverged after iteration {last_finite}")]
    Diverged {
        last_finite: usize,
        trace: Vec<TraceRecord>,
    },

    #[error("linesearch stalled after {0} reductions")]
    StalledLinesearch(usize),

    #[error("Lipschitz estimation failed: {0}")]
    Estimation(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
        if expected == actual {
            Ok(())
        } else {
            Err(Error::Shape { expected, actual })
        }
    }
}
