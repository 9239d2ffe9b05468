use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Parameters fall outside the regime where the perturbative estimate is meaningful.
    #[error("outside validity regime: {what} = {value:e}")]
    Validity { what: String, value: f64 },

    #[error(
        "exponential did not converge: achieved error bound {achieved:e} exceeds tolerance {tol:e}"
    )]
    Convergence { achieved: f64, tol: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("vanishing energy denominator for state {state:#b}")]
    Singularity { state: u64 },

    #[error("state norm deviates from one: |norm - 1| = {deviation:e}")]
    Integrity { deviation: f64 },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
