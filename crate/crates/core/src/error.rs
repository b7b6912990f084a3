use thiserror::Error;

use crate::transport::TransportSolution;

/// Errors raised by the solver, the diagnostics and the annealing controller.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The solver ran out of iterations. The last iterate is kept so the caller
    /// can decide whether it is good enough.
    #[error("sinkhorn did not converge after {} iterations (residual {residual:e})", .solution.iterations)]
    NotConverged {
        solution: Box<TransportSolution>,
        residual: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("no separation between active and inactive plan mass (eta {eta:e}, tau {tau:e})")]
    NoSeparation { eta: f64, tau: f64 },

    #[error("reduced block operator is singular (lambda_min {lambda_min:e})")]
    SingularReducedSystem { lambda_min: f64 },

    #[error(
        "analytic jacobian disagrees with finite differences (relative error {relative_error:e})"
    )]
    InconsistentJacobian { relative_error: f64 },

    #[error("controller stalled at step {step}: {pauses} consecutive pauses at eps = {epsilon}")]
    ControllerStalled {
        step: usize,
        epsilon: f64,
        pauses: usize,
    },

    #[error("calibration inconclusive: {0}")]
    CalibrationInconclusive(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
