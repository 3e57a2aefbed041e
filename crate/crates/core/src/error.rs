use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("operator is not monotone: min eigenvalue of symmetric part is {min_eig:e}")]
    NotMonotone { min_eig: f64 },

    #[error("no global Lipschitz constant computed for {0} operators")]
    UnsupportedOperator(&'static str),

    #[error("point is not among the stored samples")]
    NotSampled,

    #[error("{method} diverged at iteration {index}: {detail}")]
    Divergence {
        method: String,
        index: usize,
        detail: String,
    },

    #[error("index {index} out of range (valid: {valid})")]
    IndexOutOfRange { index: usize, valid: String },

    #[error("insufficient history for {what} at k = {k}")]
    InsufficientHistory { what: &'static str, k: usize },

    #[error("wrong setting: {0}")]
    WrongSetting(String),

    #[error("solution not found: {0}")]
    SolutionNotFound(String),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },

    #[error("certification failed: psd margin {psd_margin:e} could not be repaired")]
    CertificationFailed { psd_margin: f64 },

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("expression error: {0}")]
    Expression(String),

    #[error("SDPA format error at line {line}: {msg}")]
    Sdpa { line: usize, msg: String },

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
