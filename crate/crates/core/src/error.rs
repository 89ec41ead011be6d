use thiserror::Error;

use crate::Complex64;

pub type Result<T, E = BlabError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlabError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("point {z} lies outside {domain}")]
    OutsideDomain { z: Complex64, domain: String },

    #[error("unknown exhaustion family `{0}` (known: annuli_to_punctured_disc, discs_increasing, discs_decreasing)")]
    UnknownFamily(String),

    #[error("margin {margin} too large for {domain}")]
    MarginTooLarge { margin: f64, domain: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite integrand value at node {0}")]
    NonFinite(Complex64),

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("kernel diagonal {value:e} at {z} is below the zero-set tolerance {tolerance:e}")]
    ZeroSet {
        z: Complex64,
        value: f64,
        tolerance: f64,
    },

    #[error("series truncation {truncation} insufficient: tail bound {bound:e} exceeds {tolerance:e}")]
    TruncationInsufficient {
        truncation: usize,
        bound: f64,
        tolerance: f64,
    },

    #[error("domain {inner} is not contained in {outer}")]
    NotNested { inner: String, outer: String },

    #[error("grid belongs to {grid} but the model is on {model}")]
    GridMismatch { grid: String, model: String },

    #[error("symbol `{0}` is not admissible here: {1}")]
    Unbounded(String, String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("compact region not inside {0}")]
    CompactNotInside(String),

    #[error("index budget of {budget} exhausted before clamp level {level} met its tolerance")]
    IndexBudget { budget: usize, level: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for BlabError {
    fn from(e: std::io::Error) -> Self {
        BlabError::Io(e.to_string())
    }
}

impl From<csv::Error> for BlabError {
    fn from(e: csv::Error) -> Self {
        BlabError::Io(e.to_string())
    }
}
