use thiserror::Error;

/// Errors raised by the numerical kernels and the verification harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An integer index (dyadic level, radius exponent) outside its admissible range.
    #[error("{what} = {value} outside admissible range [{min}, {max}]")]
    Range {
        what: &'static str,
        value: i64,
        min: i64,
        max: i64,
    },
    /// A real parameter or sample outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Two grid-sampled objects that do not live on the same grid.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// Not enough data for a fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    /// A hypothesis of the experiment configuration is violated.
    #[error("configuration rejected: {0}")]
    Hypothesis(String),
    /// An iterative solver failed to reach its tolerance.
    #[error("no convergence after {iterations} iterations: {context}")]
    NoConvergence { iterations: usize, context: String },
    /// Atom construction exhausted its seed retries.
    #[error("atom construction failed: {0}")]
    Atom(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
