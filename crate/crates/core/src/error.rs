use std::path::PathBuf;

use thiserror::Error;

/// Invalid parameters or configuration text.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{key} = {value} is out of range (expected {expected})")]
    OutOfRange {
        key: String,
        value: String,
        expected: String,
    },
    #[error("{location}: unknown key `{key}`")]
    UnknownKey { location: String, key: String },
    #[error("{location}: {message}")]
    Parse { location: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

impl ConfigError {
    pub(crate) fn range(key: &str, value: impl ToString, expected: &str) -> Self {
        ConfigError::OutOfRange {
            key: key.to_string(),
            value: value.to_string(),
            expected: expected.to_string(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("cannot average an empty set of realizations")]
    EmptyInput,
    #[error("transition window holds no observed state pairs")]
    EmptyWindow,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoryError {
    #[error("discount factor {0} must lie in [0, 1)")]
    Gamma(f64),
    #[error("low level {0} must lie in (0, 0.5) for the proposer boundary")]
    LowLevel(f64),
}

/// Failure of a whole experiment run.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(
        "realization {realization} of grid point {grid_index} (master seed {master_seed}) failed: {message}"
    )]
    Realization {
        master_seed: u64,
        grid_index: u64,
        realization: u64,
        message: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
