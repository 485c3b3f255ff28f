use thiserror::Error;

/// Errors raised by the analysis library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("lift dimension too large for n = {n}, m = {m}")]
    DimensionTooLarge { n: usize, m: usize },

    #[error("unsupported lift degree {0} (supported: 1..=8)")]
    UnsupportedDegree(usize),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is singular")]
    Singular,

    #[error("unknown mode {0}")]
    UnknownMode(usize),

    /// The switching model produced a cycle that breaks its own declared
    /// contract (length bound, segment layout).
    #[error("model violation: {0}")]
    ModelViolation(String),

    /// A theorem hypothesis failed and was not asserted by the caller.
    #[error("assumption {id} failed: {detail}")]
    AssumptionFailed { id: &'static str, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
