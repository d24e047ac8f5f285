use serde::{Deserialize, Serialize};

use super::ConstructionError;

/// Position of the derivative node of the main generalized BDF formula of
/// order `k`: `⌊k/2⌋ + 1`.
pub fn gbdf_nu(k: usize) -> usize {
    k / 2 + 1
}

/// One linear multistep differentiation formula
/// `Σ α_i y(x_i) ≈ h·y'(x_j)` on a stencil of `k+1` nodes (units of `h`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmfRow {
    pub stencil: Vec<f64>,
    pub alpha: Vec<f64>,
    pub deriv_index: usize,
}

impl LmfRow {
    pub fn order(&self) -> usize {
        self.stencil.len() - 1
    }

    pub fn deriv_node(&self) -> f64 {
        self.stencil[self.deriv_index]
    }

    /// Largest defect over the monomials `((x − x_j)/s)^p`, `p ≤ degree`,
    /// where `s` is the stencil half-width. Zero for an exact formula.
    pub fn exactness_residual(&self, degree: usize) -> f64 {
        let xj = self.deriv_node();
        let s = self
            .stencil
            .iter()
            .map(|x| (x - xj).abs())
            .fold(0.0, f64::max)
            .max(1.0);
        (0..=degree)
            .map(|p| {
                let lhs: f64 = self
                    .stencil
                    .iter()
                    .zip(&self.alpha)
                    .map(|(x, a)| a * ((x - xj) / s).powi(p as i32))
                    .sum::<f64>()
                    * s;
                let rhs = if p == 1 { 1.0 } else { 0.0 };
                (lhs - rhs).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Weights of the unique order-`k` formula on `stencil` whose derivative sits
/// at `stencil[deriv_index]`.
///
/// Computed from the derivative of the Lagrange basis in barycentric form,
/// `ℓ_i'(x_j) = (λ_i/λ_j)/(x_j − x_i)`, which stays accurate for the wide
/// stencils of high-order methods where a monomial Vandermonde solve does not.
pub fn differentiation_weights(
    stencil: &[f64],
    deriv_index: usize,
) -> Result<LmfRow, ConstructionError> {
    let n = stencil.len();
    if deriv_index >= n {
        return Err(ConstructionError::BadDerivativeIndex {
            index: deriv_index,
            len: n,
        });
    }
    for i in 0..n {
        for j in i + 1..n {
            if stencil[i] == stencil[j] {
                return Err(ConstructionError::DuplicateNodes);
            }
        }
    }
    let xj = stencil[deriv_index];
    // λ_i / λ_j = Π_{m≠j}(x_j − x_m) / Π_{m≠i}(x_i − x_m)
    let pj: f64 = (0..n)
        .filter(|&m| m != deriv_index)
        .map(|m| xj - stencil[m])
        .product();
    let mut alpha = vec![0.0; n];
    for i in 0..n {
        if i == deriv_index {
            continue;
        }
        let pi: f64 = (0..n)
            .filter(|&m| m != i)
            .map(|m| stencil[i] - stencil[m])
            .product();
        alpha[i] = (pj / pi) / (xj - stencil[i]);
    }
    alpha[deriv_index] = -(0..n)
        .filter(|&m| m != deriv_index)
        .map(|m| alpha[m])
        .sum::<f64>();
    Ok(LmfRow {
        stencil: stencil.to_vec(),
        alpha,
        deriv_index,
    })
}
