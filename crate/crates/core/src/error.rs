use thiserror::Error;

/// Errors raised by the analytical and simulation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter record violates one of its invariants.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An iterative numerical kernel failed to converge.
    #[error("{routine} did not converge after {iterations} iterations")]
    Convergence { routine: &'static str, iterations: usize },

    /// A quantity exceeded the largest representable double.
    #[error("overflow: {0}")]
    Overflow(String),

    /// A Monte-Carlo estimate was requested from too few samples.
    #[error("insufficient samples: got {got}, need at least {need}")]
    InsufficientSamples { got: usize, need: usize },

    /// An empirical statistic was requested from an empty sample.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
