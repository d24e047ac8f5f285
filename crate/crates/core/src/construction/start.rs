use super::{differentiation_weights, ConstructionError, LmfRow};
use crate::linalg::{lu_factor, DenseMatrix};

/// Order-`k` block formula used to generate the first `k` values from `y₀`
/// on the uniform stencil `{0, …, k}`.
///
/// Row `j` (1-based) is the differentiation formula with derivative at node
/// `j`. Splitting off column 0 gives the square system
/// `(S ⊗ I) y = h f − (a₀ ⊗ I) y₀` over `y₁..y_k`, whose GLM form uses
/// `Â = S⁻¹` and `η = 1 ⊗ y₀` (rows of `S` sum to `−a₀`).
#[derive(Debug, Clone, PartialEq)]
pub struct StartTableau {
    k: usize,
    cal_a: DenseMatrix,
    square: DenseMatrix,
    a_hat: DenseMatrix,
    rows: Vec<LmfRow>,
    gamma_start: Option<f64>,
}

impl StartTableau {
    pub fn k(&self) -> usize {
        self.k
    }
    /// The `k × (k+1)` coefficient matrix.
    pub fn cal_a(&self) -> &DenseMatrix {
        &self.cal_a
    }
    /// Columns `1..=k` of the coefficient matrix.
    pub fn square(&self) -> &DenseMatrix {
        &self.square
    }
    pub fn a_hat(&self) -> &DenseMatrix {
        &self.a_hat
    }
    pub fn rows(&self) -> &[LmfRow] {
        &self.rows
    }
    pub fn gamma_start(&self) -> Option<f64> {
        self.gamma_start
    }
    /// Nodes `1..=k` of the stencil, in units of `h`.
    pub fn abscissae(&self) -> Vec<f64> {
        (1..=self.k).map(|j| j as f64).collect()
    }
    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma_start = Some(gamma);
        self
    }
}

pub fn starting_tableau(k: usize) -> Result<StartTableau, ConstructionError> {
    if k == 0 {
        return Err(ConstructionError::invalid(
            k,
            k,
            k,
            "order must be positive",
        ));
    }
    let stencil: Vec<f64> = (0..=k).map(|i| i as f64).collect();
    let rows = (1..=k)
        .map(|j| differentiation_weights(&stencil, j))
        .collect::<Result<Vec<_>, _>>()?;
    let cal_a = DenseMatrix::from_rows(&rows.iter().map(|r| r.alpha.clone()).collect::<Vec<_>>())?;
    let square = DenseMatrix::from_rows(
        &rows
            .iter()
            .map(|r| r.alpha[1..].to_vec())
            .collect::<Vec<_>>(),
    )?;
    let a_hat = lu_factor(&square)?.inverse();
    Ok(StartTableau {
        k,
        cal_a,
        square,
        a_hat,
        rows,
        gamma_start: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backward_euler_start() {
        let s = starting_tableau(1).unwrap();
        assert_eq!(s.a_hat()[(0, 0)], 1.0);
    }

    #[test]
    fn second_order_rows() {
        let s = starting_tableau(2).unwrap();
        let want = [[-0.5, 0.0, 0.5], [0.5, -2.0, 1.5]];
        for i in 0..2 {
            for j in 0..3 {
                assert!((s.cal_a()[(i, j)] - want[i][j]).abs() < 1e-15);
            }
        }
        // inverse of [[0, 1/2], [-2, 3/2]]
        let inv = [[1.5, -0.5], [2.0, 0.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((s.a_hat()[(i, j)] - inv[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rows_exact_to_order() {
        for k in 1..=16 {
            let s = starting_tableau(k).unwrap();
            for (j, row) in s.rows().iter().enumerate() {
                assert_eq!(row.deriv_index, j + 1);
                assert!(row.exactness_residual(k) < 1e-8, "k={k} row {j}");
            }
        }
    }
}
