//! Differentiation formulas on the block grid and assembly of the general
//! linear method tableau for a triple `(k, r, ℓ)`.
//!
//! A method of order `k` advances a block of `r` values at abscissae
//! `t + c_i·h`. Its discrete problem is
//!
//! ```text
//! (A₂ ⊗ I) y_new = h f_new − (A₁ ⊗ I) y_old
//! ```
//!
//! which in GLM form reads `y_new = h (A ⊗ I) f_new + (U ⊗ I) y_old` with
//! `A = A₂⁻¹` and `U = −A₂⁻¹A₁`. Each row of `[A₁ | A₂]` is an order-`k`
//! differentiation formula whose derivative node is one of the block points.

mod catalogue;
mod grid;
mod io;
mod start;
mod tableau;
mod weights;

pub use catalogue::{
    catalogue, catalogue_method, catalogue_triple, reference_params, ReferenceParams,
    CATALOGUE_TRIPLES, REFERENCE_GEOMETRIC, REFERENCE_RATIONAL,
};
pub use grid::{abscissae, AuxChoice};
pub use io::TableauDocument;
pub use start::{starting_tableau, StartTableau};
pub use tableau::{
    assemble_bdf_block, assemble_glm, error_estimator_tableau, GlmTableau, MethodId,
};
pub use weights::{differentiation_weights, gbdf_nu, LmfRow};

use crate::linalg::LinalgError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConstructionError {
    #[error("invalid method triple (k={k}, r={r}, ell={ell}): {reason}")]
    InvalidTriple {
        k: usize,
        r: usize,
        ell: usize,
        reason: String,
    },
    #[error("stencil nodes must be distinct")]
    DuplicateNodes,
    #[error("derivative index {index} outside stencil of {len} nodes")]
    BadDerivativeIndex { index: usize, len: usize },
    #[error("malformed tableau document: {0}")]
    Document(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

impl ConstructionError {
    pub(crate) fn invalid(k: usize, r: usize, ell: usize, reason: impl Into<String>) -> Self {
        Self::InvalidTriple {
            k,
            r,
            ell,
            reason: reason.into(),
        }
    }
}
