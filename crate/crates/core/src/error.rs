//! Crate-wide error type.

/// Errors produced by construction, evolution, and solver routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The integrator could not complete (step underflow, positivity loss
    /// beyond tolerance, exhausted step budget).
    #[error("integration failure: {0}")]
    IntegrationFailure(String),

    /// All dissipation rates are zero, so no unique steady state exists.
    #[error("no unique steady state: all dissipation rates are zero")]
    NoUniqueSteadyState,

    /// A superoperator would exceed the configured dimension cap.
    #[error("dimension overflow: {0}")]
    DimensionOverflow(String),

    /// A matrix failed the density-matrix invariants.
    #[error("state validation failed: {0}")]
    InvalidState(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid_argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
