//! The blended reformulation on the linear test equation `y' = λy`.
//!
//! With `q = hλ` the discrete problem is `(I − qA) y = η`. The blended
//! iteration only inverts the scalar weight `θ(q) = (1 − γq)⁻¹`, and its
//! iteration matrix is `Z(q) = q/(1−γq)² · W` with `W = A⁻¹(A − γI)²`.
//! Everything here is a function of `A` and `γ`.

mod params;
mod scalar;

pub use params::{
    convergence_params, gamma_star, iteration_core, optimize_gamma, optimize_gamma_unchecked,
    z_matrix, BlendedParams, GammaOptimum, NonConvexWarning,
};
pub use scalar::{
    contraction_estimate, scalar_blended_iterate, scalar_blended_iterate_from, scalar_sweep,
    IterateHistory,
};

use crate::linalg::LinalgError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BlendedError {
    #[error("blended parameter gamma must be positive and finite, got {0}")]
    BadGamma(f64),
    #[error("tableau has no blended parameter; optimize it first")]
    MissingGamma,
    #[error("weight function is singular: 1 - gamma*q = 0")]
    SingularWeight,
    #[error("spectrum of A is not in the open right half-plane (eigenvalue {re} + {im}i)")]
    SpectrumNotPositive { re: f64, im: f64 },
    #[error("blended iteration diverged at sweep {sweep} (norm {norm:.3e})")]
    Divergence { sweep: usize, norm: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
