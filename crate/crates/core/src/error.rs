//! Error type shared across the crate.

/// Errors produced by measure construction, transform evaluation, and the
/// Monte Carlo driver.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A measure failed validation (masses, ordering, overlap, total mass).
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    /// An argument lies outside the mathematical domain of the requested map.
    #[error("domain error: {0}")]
    Domain(String),
    /// The requested point sits exactly on a boundary where the quantity is
    /// not defined (for example the rank threshold of the exponent profile).
    #[error("boundary: {0}")]
    Boundary(String),
    /// A structural precondition of the chosen method is not met (for example
    /// requesting the log-free determinant shortcut for a non-invertible
    /// operator).
    #[error("precondition not met: {0}")]
    Precondition(String),
    /// An iterative solver failed to reach its target accuracy.
    #[error("no convergence: {0}")]
    NoConvergence(String),
    /// A configuration document is malformed or inconsistent.
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    /// Serialization or file-format failure.
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
