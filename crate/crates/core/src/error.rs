use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("matrix is not unitary (max deviation of U†U from I is {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("decoherence value |κ| = {magnitude} exceeds 1")]
    KappaOutOfRange { magnitude: f64 },

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid noise schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid counts: {0}")]
    InvalidCounts(String),

    #[error("invalid config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by user-supplied configuration or parameters.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::InvalidSpectrum(_) | Error::InvalidSchedule(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
