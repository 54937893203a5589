//! Error classes and their process exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Failure {
    /// Bad configuration or arguments.
    #[error("{0}")]
    Validation(String),
    /// The computation itself failed (integration, convergence, calibration).
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 1,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Failure::Validation(msg.into())
    }
}

impl From<noonsim::Error> for Failure {
    fn from(e: noonsim::Error) -> Self {
        use noonsim::Error as E;
        match e {
            E::InvalidArgument(_) | E::Aliasing { .. } => Failure::Validation(e.to_string()),
            E::IntegrationFailure(_)
            | E::ConvergenceFailure { .. }
            | E::CalibrationFailure { .. }
            | E::DecompositionViolation { .. } => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}
