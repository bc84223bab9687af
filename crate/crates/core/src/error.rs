use thiserror::Error;

/// Errors raised by the spectral and variational routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Spectral parameter lies on (or numerically at) a singular set S±, S₀.
    #[error("singular sample at lambda = {lambda}: {reason}")]
    Singular { lambda: f64, reason: String },

    /// φ± is real (off-band), so (φ±, conj φ±) is not a basis of the solution space.
    #[error("degenerate basis at lambda = {0}: eigenfunction is real")]
    DegenerateBasis(f64),

    #[error("criterion not applicable: {0}")]
    NotApplicable(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("solver did not converge: {0}")]
    NotConverged(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
