use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A root finder or series failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Monte Carlo estimate rests on too few effective samples.
    #[error("confidence interval too wide: effective sample size {ess:.1} (raise the sample count or use an analytic bound)")]
    CiTooWide { ess: f64 },

    /// The requested bound is not available for this channel.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Energy-per-bit solver could not bracket the target rate.
    #[error("no bracket: {0}")]
    NoBracket(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
