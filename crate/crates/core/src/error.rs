use thiserror::Error;

/// Errors raised by the numerical routines and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The branching ratio makes the Hawkes process (or its resolvent) explode.
    #[error("instability: branching ratio aT = {a_t} must lie in [0, 1)")]
    Instability { a_t: f64 },

    /// The near-instability schedule produced an invalid branching ratio.
    #[error("schedule error: {0}")]
    Schedule(String),

    /// A sum-of-exponentials fit did not produce a usable kernel.
    #[error("approximation error: {0}")]
    Approximation(String),

    /// A fixed-point iteration failed to converge.
    #[error("iteration did not converge after {iterations} iterations (last sup-difference {residual:e})")]
    Iteration { iterations: usize, residual: f64 },

    /// A regression could not be performed.
    #[error("fit error: {0}")]
    Fit(String),

    /// The requested simulator does not cover this range of the tail exponent.
    #[error("wrong regime: {0}")]
    Regime(String),

    /// Invalid experiment configuration or command-line input.
    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
