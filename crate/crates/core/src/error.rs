use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {what}: {reason}")]
    InvalidParameter { what: &'static str, reason: String },

    #[error("N = {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("beam index {0} selected more than once")]
    DuplicateBeam(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("covariance is indefinite: eigenvalue {min_eigenvalue:e} below -{threshold:e}")]
    IndefiniteCovariance { min_eigenvalue: f64, threshold: f64 },

    #[error("singular effective channel (condition number {condition:e})")]
    Singular { condition: f64 },

    #[error("infeasible beam allocation: {0}")]
    Infeasible(String),

    #[error("unknown architecture `{0}`")]
    UnknownArchitecture(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{architecture} realization {realization}: {source}")]
    Realization {
        architecture: String,
        realization: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{} point-level failure(s); first: {}", .0.len(), .0[0])]
    PointFailures(Vec<Error>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            what,
            reason: reason.into(),
        }
    }
}
