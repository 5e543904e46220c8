use thiserror::Error;

/// Errors raised by the physics and numerics layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular geometry: {0}")]
    Singularity(String),

    #[error("integration failed at t = {time:e} s: {reason}")]
    Integration { time: f64, reason: String },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error(
        "Fock cutoff {cutoff} not converged (relative change {change:.3e}); increase the cutoff"
    )]
    Convergence { cutoff: usize, change: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
