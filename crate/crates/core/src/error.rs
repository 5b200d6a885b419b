use std::path::PathBuf;

use thiserror::Error;

use crate::curvature::minimize::IterRecord;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid input: out-of-range parameter, mismatched dimension, bad normal.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A construction could not be completed (e.g. degenerate random draws).
    #[error("construction error: {0}")]
    Construction(String),

    /// Non-finite or non-convergent numerics; carries the iteration log if any.
    #[error("numerical error: {message}")]
    Numerical {
        message: String,
        trace: Vec<IterRecord>,
    },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
