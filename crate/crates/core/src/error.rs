use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integration failure: {0}")]
    IntegrationFailure(String),

    #[error("imaginary-time propagation did not converge after {iterations} iterations (last energy change {residual:e} rad/s)")]
    ConvergenceFailure { iterations: usize, residual: f64 },

    #[error("theta grid too coarse: {points} points cannot resolve frequencies up to {max_frequency} (need at least {required})")]
    Aliasing {
        points: usize,
        max_frequency: usize,
        required: usize,
    },

    #[error("calibration failure: dyad ({row}, {col}) single-frequency fit residual {residual:e}")]
    CalibrationFailure {
        row: usize,
        col: usize,
        residual: f64,
    },

    #[error("parity decomposition violated: max reconstruction error {max_error:e} exceeds {threshold:e}")]
    DecompositionViolation { max_error: f64, threshold: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
