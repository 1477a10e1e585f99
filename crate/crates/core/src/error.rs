use thiserror::Error;

/// Errors surfaced by the library, grouped by how a front end should react:
/// bad inputs, violated mathematical claims, and numerical failures.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside an operation's documented domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A claim the library treats as a theorem failed to hold. This must
    /// never fire; if it does, either the claim or the code is wrong.
    #[error("violated claim: {0}")]
    ClaimViolation(String),

    /// A numerical contract (convergence, norm conservation, eigensolver
    /// success, truncation tolerance) was not met.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn claim(msg: impl Into<String>) -> Self {
        Error::ClaimViolation(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
