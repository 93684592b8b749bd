use std::path::PathBuf;

/// Errors raised by the simulator and detectors.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("input vector is empty")]
    EmptyInput,

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("variance must be non-negative, got {0}")]
    NegativeVariance(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("path delay {delay} exceeds prefix length {prefix}")]
    DelayExceedsPrefix { delay: usize, prefix: usize },

    #[error("cannot place {paths} distinct delays in [0, {l_max}]")]
    TooManyPaths { paths: usize, l_max: usize },

    #[error("matrix is singular or not positive definite")]
    Singular,

    #[error("unknown detector `{0}`")]
    UnknownDetector(String),

    #[error("calibration grid is empty")]
    EmptyGrid,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    ConfigFile {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, actual })
    }
}
