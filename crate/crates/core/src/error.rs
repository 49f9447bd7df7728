use thiserror::Error;

use crate::integrator::Trajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("saddle solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    SolverNonConvergence { iterations: usize, residual: f64 },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("no KKT point exists (least-squares residual {residual:.3e})")]
    Infeasible { residual: f64 },

    #[error("operation requires a quadratic objective: {0}")]
    NotQuadratic(&'static str),

    #[error("trajectory diverged at t = {t}")]
    Diverged { t: f64, partial: Box<Trajectory> },

    #[error("integration truncated after {steps} steps at t = {t}")]
    Truncated {
        steps: usize,
        t: f64,
        partial: Box<Trajectory>,
    },

    #[error("rate estimation: {0}")]
    Estimation(String),

    #[error("config: {0}")]
    Config(String),

    #[error("parse: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_dim(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension {
            what,
            expected,
            got,
        })
    }
}
