use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the analysis, localization and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("signal too short: need at least {needed} samples, got {got}")]
    SignalTooShort { needed: usize, got: usize },

    #[error("filter for channel at {frequency:.1} Hz needs {needed} samples but the cap is {cap}")]
    FilterTooLong {
        frequency: f64,
        needed: usize,
        cap: usize,
    },

    #[error("duplicate direction (az {azimuth}, el {elevation})")]
    DuplicateDirection { azimuth: f64, elevation: f64 },

    #[error("impulse response lengths differ beyond padding tolerance ({shortest} vs {longest})")]
    MismatchedLengths { shortest: usize, longest: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("infeasible placement: {0}")]
    InfeasiblePlacement(String),

    #[error("image source count {count} exceeds cap {cap}")]
    TooManyImages { count: usize, cap: usize },

    #[error("sample rate mismatch: {0} Hz vs {1} Hz")]
    SampleRateMismatch(u32, u32),

    #[error("malformed file {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },

    #[error("checksum mismatch in {path}")]
    Checksum { path: PathBuf },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("wav error: {0}")]
    Wav(#[from] hound::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Malformed {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
