use std::fmt;

use serde::{Deserialize, Serialize};

use super::{abscissae, differentiation_weights, gbdf_nu, AuxChoice, ConstructionError, LmfRow};
use crate::linalg::{lu_factor, DenseMatrix};

/// Identifies a method: order `k`, blocksize `r`, number `ℓ` of carried
/// points, and auxiliary-point placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MethodId {
    pub k: usize,
    pub r: usize,
    pub ell: usize,
    pub choice: AuxChoice,
}

impl MethodId {
    pub fn new(k: usize, r: usize, ell: usize, choice: AuxChoice) -> Self {
        Self { k, r, ell, choice }
    }

    /// Number of auxiliary points, `r − ℓ`.
    pub fn aux_count(&self) -> usize {
        self.r.saturating_sub(self.ell)
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.k, self.r, self.ell)?;
        if self.r > self.ell {
            write!(f, "/choice{}", self.choice.code())?;
        }
        Ok(())
    }
}

/// Full definition of a general linear method built from differentiation
/// formulas.
///
/// Columns of `A₁` (and `U`) refer to the previous block: column `j < ℓ−1`
/// holds the point at `c_{j+1} − ℓ = j + 1 − ℓ`, column `r−1` the point at
/// `0`, and the auxiliary columns `ℓ−1..r−2` are identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GlmTableau {
    id: MethodId,
    nu: usize,
    c: Vec<f64>,
    xi: Vec<f64>,
    a1: DenseMatrix,
    a2: DenseMatrix,
    a: DenseMatrix,
    u: DenseMatrix,
    gamma: Option<f64>,
    rows: Vec<LmfRow>,
}

/// Row construction: stencil start in the extended grid and derivative index.
struct RowPlan {
    start: usize,
    deriv_index: usize,
}

impl GlmTableau {
    pub fn id(&self) -> MethodId {
        self.id
    }
    pub fn k(&self) -> usize {
        self.id.k
    }
    pub fn r(&self) -> usize {
        self.id.r
    }
    pub fn ell(&self) -> usize {
        self.id.ell
    }
    pub fn nu(&self) -> usize {
        self.nu
    }
    pub fn choice(&self) -> AuxChoice {
        self.id.choice
    }
    pub fn c(&self) -> &[f64] {
        &self.c
    }
    pub fn xi(&self) -> &[f64] {
        &self.xi
    }
    pub fn a1(&self) -> &DenseMatrix {
        &self.a1
    }
    pub fn a2(&self) -> &DenseMatrix {
        &self.a2
    }
    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }
    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }
    /// The blended parameter, once chosen (see [`crate::blended`]).
    pub fn gamma(&self) -> Option<f64> {
        self.gamma
    }
    pub fn rows(&self) -> &[LmfRow] {
        &self.rows
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }

    /// Indices `ℓ−1..r−2` (0-based) of the auxiliary block points.
    pub fn aux_indices(&self) -> Vec<usize> {
        (self.id.ell - 1..self.id.r - 1).collect()
    }

    pub fn is_aux(&self, index: usize) -> bool {
        index + 1 >= self.id.ell && index + 1 < self.id.r
    }

    /// Time (units of `h`, relative to the start of the step) of the
    /// previous-block value in each column of `A₁`/`U`.
    pub fn past_times(&self) -> Vec<f64> {
        self.c.iter().map(|ci| ci - self.id.ell as f64).collect()
    }

    /// Largest polynomial-exactness defect over all rows and all monomials of
    /// degree `≤ degree`, with nodes centred at the derivative point and
    /// scaled to unit width.
    pub fn order_residual(&self, degree: usize) -> f64 {
        let past = self.past_times();
        let r = self.id.r;
        let mut worst: f64 = 0.0;
        for i in 0..r {
            let ci = self.c[i];
            let mut nodes: Vec<(f64, f64)> = Vec::with_capacity(2 * r);
            for j in 0..r {
                if !self.is_aux(j) {
                    nodes.push((past[j], self.a1[(i, j)]));
                }
                nodes.push((self.c[j], self.a2[(i, j)]));
            }
            let s = nodes
                .iter()
                .map(|(x, _)| (x - ci).abs())
                .fold(0.0, f64::max)
                .max(1.0);
            for p in 0..=degree {
                let lhs: f64 = nodes
                    .iter()
                    .map(|(x, w)| w * ((x - ci) / s).powi(p as i32))
                    .sum::<f64>()
                    * s;
                let rhs = if p == 1 { 1.0 } else { 0.0 };
                worst = worst.max((lhs - rhs).abs());
            }
        }
        worst
    }

    pub(crate) fn from_parts(
        id: MethodId,
        nu: usize,
        c: Vec<f64>,
        xi: Vec<f64>,
        a1: DenseMatrix,
        a2: DenseMatrix,
        gamma: Option<f64>,
        rows: Vec<LmfRow>,
    ) -> Result<Self, ConstructionError> {
        let lu = lu_factor(&a2)?;
        let a = lu.inverse();
        let u = a.matmul(&a1)?.scale(-1.0);
        Ok(Self {
            id,
            nu,
            c,
            xi,
            a1,
            a2,
            a,
            u,
            gamma,
            rows,
        })
    }

    fn build(id: MethodId, nu: usize, plans: &[RowPlan]) -> Result<Self, ConstructionError> {
        let MethodId { k, r, ell, choice } = id;
        let (c, xi) = abscissae(k, r, ell, choice)?;
        let grid: Vec<f64> = (0..ell)
            .map(|g| g as f64 - (ell - 1) as f64)
            .chain(c.iter().copied())
            .collect();
        let mut a1 = DenseMatrix::zeros(r, r);
        let mut a2 = DenseMatrix::zeros(r, r);
        let mut rows = Vec::with_capacity(r);
        for (i, plan) in plans.iter().enumerate() {
            let stencil = &grid[plan.start..plan.start + k + 1];
            let row = differentiation_weights(stencil, plan.deriv_index)?;
            for (offset, &w) in row.alpha.iter().enumerate() {
                let g = plan.start + offset;
                if g >= ell {
                    a2[(i, g - ell)] += w;
                } else if g == ell - 1 {
                    a1[(i, r - 1)] += w;
                } else {
                    a1[(i, g)] += w;
                }
            }
            rows.push(row);
        }
        Self::from_parts(id, nu, c, xi, a1, a2, None, rows)
    }
}

/// Assembles the method for `(k, r, ℓ)` from generalized BDF rows.
///
/// On the extended grid `{−(ℓ−1), …, 0} ∪ {c_1, …, c_r}`, row `i` (1-based)
/// with `i ≤ r − (k − ν)` is the main formula with its derivative at position
/// `ν` of the `k+1` consecutive nodes centred on `c_i`; the remaining rows are
/// final formulas on the last `k+1` grid nodes with derivative index
/// `k − (r − i)`.
pub fn assemble_glm(
    k: usize,
    r: usize,
    ell: usize,
    choice: AuxChoice,
) -> Result<GlmTableau, ConstructionError> {
    if k == 0 || r == 0 || ell == 0 || ell > r {
        return Err(ConstructionError::invalid(
            k,
            r,
            ell,
            "need k, r >= 1 and 1 <= ell <= r",
        ));
    }
    let nu = gbdf_nu(k);
    if ell < nu {
        return Err(ConstructionError::invalid(
            k,
            r,
            ell,
            format!("ell must be at least nu = {nu}"),
        ));
    }
    if ell + r < k + 1 {
        return Err(ConstructionError::invalid(
            k,
            r,
            ell,
            format!("grid has {} nodes, need at least k+1 = {}", ell + r, k + 1),
        ));
    }
    let main_rows = r.saturating_sub(k - nu);
    let last_start = ell + r - (k + 1);
    let plans: Vec<RowPlan> = (1..=r)
        .map(|i| {
            if i <= main_rows {
                RowPlan {
                    start: ell - 1 + i - nu,
                    deriv_index: nu,
                }
            } else {
                RowPlan {
                    start: last_start,
                    deriv_index: k - (r - i),
                }
            }
        })
        .collect();
    let choice = if ell == r { AuxChoice::None } else { choice };
    GlmTableau::build(MethodId::new(k, r, ell, choice), nu, &plans)
}

/// Order-`k+1` companion on the same grid, used to form local-error
/// residuals.
pub fn error_estimator_tableau(
    k: usize,
    r: usize,
    ell: usize,
    choice: AuxChoice,
) -> Result<GlmTableau, ConstructionError> {
    assemble_glm(k + 1, r, ell, choice)
}

/// `k` consecutive steps of the classical `k`-step BDF packed as a block
/// (`r = ℓ = k`, derivative always at the last stencil node).
pub fn assemble_bdf_block(k: usize) -> Result<GlmTableau, ConstructionError> {
    if k == 0 {
        return Err(ConstructionError::invalid(
            k,
            k,
            k,
            "order must be positive",
        ));
    }
    let plans: Vec<RowPlan> = (1..=k)
        .map(|i| RowPlan {
            start: i - 1,
            deriv_index: k,
        })
        .collect();
    GlmTableau::build(MethodId::new(k, k, k, AuxChoice::None), k, &plans)
}
