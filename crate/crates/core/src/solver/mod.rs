//! Integration with the blended methods: a uniform starting block, the
//! blended iteration on the nonlinear block equations, a deferred-correction
//! error estimate and stepsize control.
//!
//! Every step advances `ℓh`. After a stepsize change the previous-block
//! values are re-evaluated at the new uniform spacing from the polynomial
//! through recent accepted points, which also provides the predictor and
//! dense output.

mod driver;
mod history;
mod iteration;
mod method;

pub use driver::{
    integrate, step_ratio, Engine, IntegrationResult, Sample, SolverOptions, Statistics,
    StepOutcome,
};
pub use history::History;
pub use iteration::{
    blended_nonlinear_solve, estimate_error, ErrorEstimate, IterationControl, IterationMatrix,
    SolveOutcome, Weights,
};
pub use method::{SolverMethod, StageSystem};

use crate::blended::BlendedError;
use crate::construction::ConstructionError;
use crate::linalg::LinalgError;
use crate::problems::ProblemError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("method {method} cannot be used for integration: {reason}")]
    NotEligible { method: String, reason: String },
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error("blended iteration failed after {sweeps} sweeps (contraction {ratio:.3})")]
    IterationFailure { sweeps: usize, ratio: f64 },
    #[error("iteration matrix I - h*gamma*J is singular for h = {h:.3e}")]
    SingularIterationMatrix { h: f64 },
    #[error("stepsize underflow at t = {t}: h = {h:.3e}")]
    StepsizeUnderflow { t: f64, h: f64 },
    #[error("starting procedure failed: {0}")]
    StartFailure(String),
    #[error("step limit of {0} reached")]
    TooManySteps(usize),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Blended(#[from] BlendedError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

impl SolverError {
    /// Whether the error reflects bad input rather than a failed integration.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            SolverError::NotEligible { .. }
                | SolverError::InvalidOptions(_)
                | SolverError::Construction(_)
                | SolverError::Problem(_)
        )
    }
}
