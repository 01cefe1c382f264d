use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A theta factor in a denominator vanishes at the requested point.
    #[error("pole: {0}")]
    Pole(String),

    /// The generic coefficient formulas are singular at g = 1.
    #[error("branch error: {0}")]
    Branch(String),

    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    /// Iterative numerics failed to converge or produced a non-finite value.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Eigenvalues too close to be labeled by continuation.
    #[error("labeling failed at p = {p}: {detail}")]
    Labeling { p: f64, detail: String },

    #[error("ill-conditioned projector (amplification {amplification:.3e}, limit {limit:.1e})")]
    Conditioning { amplification: f64, limit: f64 },

    #[error("internal error: {0}")]
    Internal(String),
}
