use crate::blended::{optimize_gamma, optimize_gamma_unchecked, BlendedError, BlendedParams};
use crate::construction::{
    assemble_glm, catalogue_triple, error_estimator_tableau, starting_tableau, AuxChoice,
    ConstructionError, GlmTableau, StartTableau,
};
use crate::linalg::{lu_factor, DenseMatrix};

use super::SolverError;

/// Block equations `y = h(A ⊗ I)F + η` at abscissae `c`, with the matrices
/// the blended sweep needs.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSystem {
    pub a: DenseMatrix,
    pub a_inv: DenseMatrix,
    pub gamma: f64,
    pub c: Vec<f64>,
}

impl StageSystem {
    pub fn new(a: DenseMatrix, gamma: f64, c: Vec<f64>) -> Result<Self, SolverError> {
        let a_inv = lu_factor(&a)?.inverse();
        Ok(Self { a, a_inv, gamma, c })
    }

    pub fn stages(&self) -> usize {
        self.c.len()
    }
}

/// Everything needed to integrate with one method: the tableau with its
/// optimal `γ`, the order `k+1` companion for error estimation and the
/// starting block.
#[derive(Debug, Clone)]
pub struct SolverMethod {
    pub tableau: GlmTableau,
    pub estimator: GlmTableau,
    pub params: BlendedParams,
    pub main: StageSystem,
    pub start: StartTableau,
    pub start_params: BlendedParams,
    pub start_system: StageSystem,
}

impl SolverMethod {
    /// Catalogue method of order `k`.
    pub fn new(k: usize, choice: AuxChoice) -> Result<Self, SolverError> {
        let (k, r, ell) = catalogue_triple(k).ok_or_else(|| {
            SolverError::Construction(ConstructionError::invalid(
                k,
                0,
                0,
                "order not in the catalogue",
            ))
        })?;
        Self::from_triple(k, r, ell, choice)
    }

    pub fn from_triple(
        k: usize,
        r: usize,
        ell: usize,
        choice: AuxChoice,
    ) -> Result<Self, SolverError> {
        Self::from_tableau(assemble_glm(k, r, ell, choice)?)
    }

    /// Prepares a tableau for integration. Fails with
    /// [`SolverError::NotEligible`] when the order `k+1` companion on the
    /// same grid does not exist.
    pub fn from_tableau(tableau: GlmTableau) -> Result<Self, SolverError> {
        let id = tableau.id();
        let estimator = error_estimator_tableau(id.k, id.r, id.ell, id.choice).map_err(|e| {
            SolverError::NotEligible {
                method: id.to_string(),
                reason: format!(
                    "no order-{} error-estimator companion on its grid ({e})",
                    id.k + 1
                ),
            }
        })?;
        let params = optimize_gamma(tableau.a())?.params;
        let tableau = tableau.with_gamma(params.gamma);
        let main = StageSystem::new(tableau.a().clone(), params.gamma, tableau.c().to_vec())?;
        let start = starting_tableau(id.k)?;
        let start_params = match optimize_gamma(start.a_hat()) {
            Ok(opt) => opt.params,
            Err(BlendedError::SpectrumNotPositive { .. }) => {
                optimize_gamma_unchecked(start.a_hat())?.params
            }
            Err(e) => return Err(e.into()),
        };
        let start = start.with_gamma(start_params.gamma);
        let start_system =
            StageSystem::new(start.a_hat().clone(), start_params.gamma, start.abscissae())?;
        Ok(Self {
            tableau,
            estimator,
            params,
            main,
            start,
            start_params,
            start_system,
        })
    }

    pub fn k(&self) -> usize {
        self.tableau.k()
    }
    pub fn r(&self) -> usize {
        self.tableau.r()
    }
    pub fn ell(&self) -> usize {
        self.tableau.ell()
    }
}
