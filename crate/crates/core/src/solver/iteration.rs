use crate::construction::GlmTableau;
use crate::linalg::{lu_factor, DenseMatrix, LuFactorization};
use crate::problems::OdeProblem;

use super::{SolverError, StageSystem};

/// Factorization of `N = I − hγJ`, the only matrix the blended iteration
/// inverts.
#[derive(Debug, Clone)]
pub struct IterationMatrix {
    lu: LuFactorization<f64>,
    pub h: f64,
    pub gamma: f64,
    /// Identifies the Jacobian the factorization was built from.
    pub jac_version: u64,
}

impl IterationMatrix {
    pub fn new(
        jac: &DenseMatrix,
        h: f64,
        gamma: f64,
        jac_version: u64,
    ) -> Result<Self, SolverError> {
        let n = jac.scale(-h * gamma).shift_diagonal(1.0);
        let lu = lu_factor(&n).map_err(|_| SolverError::SingularIterationMatrix { h })?;
        Ok(Self {
            lu,
            h,
            gamma,
            jac_version,
        })
    }

    pub fn dim(&self) -> usize {
        self.lu.dim()
    }

    fn solve(&self, x: &mut [f64], scratch: &mut [f64]) {
        self.lu
            .solve_into(x, scratch)
            .expect("dimension checked by caller");
    }
}

/// Componentwise error scales `atol + rtol·|y_j|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    pub scale: Vec<f64>,
}

impl Weights {
    pub fn new(rtol: f64, atol: f64, y: &[f64]) -> Self {
        Self {
            scale: y.iter().map(|v| atol + rtol * v.abs()).collect(),
        }
    }

    /// Uses `max(|a_j|, |b_j|)` as the magnitude.
    pub fn from_pair(rtol: f64, atol: f64, a: &[f64], b: &[f64]) -> Self {
        Self {
            scale: a
                .iter()
                .zip(b)
                .map(|(x, y)| atol + rtol * x.abs().max(y.abs()))
                .collect(),
        }
    }

    /// Root-mean-square of `x_ij / scale_j` over all rows of a block.
    pub fn block_norm(&self, x: &DenseMatrix) -> f64 {
        let m = self.scale.len();
        let mut s = 0.0;
        for i in 0..x.rows() {
            for (v, sc) in x.row(i).iter().zip(&self.scale) {
                s += (v / sc).powi(2);
            }
        }
        (s / (x.rows() * m) as f64).sqrt()
    }

    pub fn vec_norm(&self, x: &[f64]) -> f64 {
        let s: f64 = x
            .iter()
            .zip(&self.scale)
            .map(|(v, sc)| (v / sc).powi(2))
            .sum();
        (s / x.len() as f64).sqrt()
    }
}

/// Increments below this many ulps of the largest block entry count as
/// converged, whatever the weighted tolerance.
const ROUNDOFF_FLOOR: f64 = 4.0;
/// An iteration that stops contracting with increments below this many ulps
/// has reached its rounding noise and is accepted.
const NOISE_FLOOR: f64 = 1024.0;

/// Inner-iteration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationControl {
    pub max_sweeps: usize,
    /// Converged once the weighted increment norm falls below this.
    pub tol: f64,
    pub trace: bool,
}

impl Default for IterationControl {
    fn default() -> Self {
        Self {
            max_sweeps: 12,
            tol: 0.01,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub block: DenseMatrix,
    pub sweeps: usize,
    /// Last observed increment ratio `‖δ⁽ⁱ⁾‖/‖δ⁽ⁱ⁻¹⁾‖` (0 after one sweep).
    pub contraction: f64,
    pub f_evals: usize,
    pub row_solves: usize,
    /// Iterates after every sweep when tracing was requested.
    pub trace: Vec<DenseMatrix>,
}

/// `F_i = f(t + c_i h, y_i)` for every block row.
pub(crate) fn eval_block(
    problem: &OdeProblem,
    c: &[f64],
    t: f64,
    h: f64,
    y: &DenseMatrix,
    out: &mut DenseMatrix,
) {
    for (i, ci) in c.iter().enumerate() {
        let mut row = vec![0.0; y.cols()];
        problem.rhs(t + ci * h, y.row(i), &mut row);
        for (j, v) in row.into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
}

/// Blended iteration for `y = h(A ⊗ I)F(y) + η`:
///
/// ```text
/// r₁ = ((I − γA⁻¹) ⊗ I)(y − η) − h((A − γI) ⊗ I)F
/// r₂ = (A⁻¹ ⊗ I)(y − η) − hF
/// δ  = N⁻¹(N⁻¹r₁ + γr₂),   y ← y − δ
/// ```
///
/// `t` is the origin of the block (stage `i` sits at `t + c_i h`).
#[allow(clippy::too_many_arguments)]
pub fn blended_nonlinear_solve(
    problem: &OdeProblem,
    sys: &StageSystem,
    t: f64,
    h: f64,
    eta: &DenseMatrix,
    predictor: DenseMatrix,
    n: &IterationMatrix,
    weights: &Weights,
    ctl: &IterationControl,
) -> Result<SolveOutcome, SolverError> {
    let (r, m) = predictor.shape();
    let gamma = sys.gamma;
    let mut y = predictor;
    let mut f = DenseMatrix::zeros(r, m);
    let mut scratch = vec![0.0; m];
    let mut x = vec![0.0; m];
    let mut prev = f64::NAN;
    let mut growing = 0;
    let mut contraction = 0.0;
    let mut trace = Vec::new();
    let mut f_evals = 0;
    let mut row_solves = 0;
    for sweep in 1..=ctl.max_sweeps {
        eval_block(problem, &sys.c, t, h, &y, &mut f);
        f_evals += r;
        let d = y.sub(eta)?;
        let ainv_d = sys.a_inv.matmul(&d)?;
        let af = sys.a.matmul(&f)?;
        let mut delta = DenseMatrix::zeros(r, m);
        for i in 0..r {
            for j in 0..m {
                let r1 = d[(i, j)] - gamma * ainv_d[(i, j)] - h * (af[(i, j)] - gamma * f[(i, j)]);
                x[j] = r1;
            }
            n.solve(&mut x, &mut scratch);
            for j in 0..m {
                x[j] += gamma * (ainv_d[(i, j)] - h * f[(i, j)]);
            }
            n.solve(&mut x, &mut scratch);
            for j in 0..m {
                delta[(i, j)] = x[j];
                y[(i, j)] -= x[j];
            }
            row_solves += 2;
        }
        let ulps = delta.max_abs() / (f64::EPSILON * y.max_abs());
        let norm = weights.block_norm(&delta);
        if ctl.trace {
            trace.push(y.clone());
        }
        if !norm.is_finite() {
            return Err(SolverError::IterationFailure {
                sweeps: sweep,
                ratio: f64::INFINITY,
            });
        }
        if sweep > 1 {
            contraction = if prev > 0.0 { norm / prev } else { 0.0 };
        }
        let stagnant = sweep > 1 && contraction >= 0.5 && ulps <= NOISE_FLOOR;
        if norm <= ctl.tol || ulps <= ROUNDOFF_FLOOR || stagnant {
            return Ok(SolveOutcome {
                block: y,
                sweeps: sweep,
                contraction,
                f_evals,
                row_solves,
                trace,
            });
        }
        // W is not normal, so a single growing sweep can be transient
        growing = if sweep > 1 && contraction >= 1.0 {
            growing + 1
        } else {
            0
        };
        if growing >= 2 {
            return Err(SolverError::IterationFailure {
                sweeps: sweep,
                ratio: contraction,
            });
        }
        prev = norm;
    }
    Err(SolverError::IterationFailure {
        sweeps: ctl.max_sweeps,
        ratio: contraction,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorEstimate {
    /// Estimated local error of every stage.
    pub e: DenseMatrix,
    /// Weighted RMS of the last stage.
    pub norm: f64,
    pub f_evals: usize,
    pub row_solves: usize,
}

/// Deferred-correction estimate: `τ` is the residual of the block in the
/// order `k+1` companion, `τ₁ = γ(A⁻¹ ⊗ I)τ`, and
/// `e = N⁻¹(N⁻¹(τ − τ₁) + τ₁)`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_error(
    problem: &OdeProblem,
    sys: &StageSystem,
    estimator: &GlmTableau,
    t: f64,
    h: f64,
    y_old: &DenseMatrix,
    block: &DenseMatrix,
    n: &IterationMatrix,
    weights: &Weights,
) -> Result<ErrorEstimate, SolverError> {
    let (r, m) = block.shape();
    let mut f = DenseMatrix::zeros(r, m);
    eval_block(problem, &sys.c, t, h, block, &mut f);
    let hf = estimator.a().matmul(&f)?.scale(h);
    let tau = block.sub(&hf)?.sub(&estimator.u().matmul(y_old)?)?;
    let tau1 = sys.a_inv.matmul(&tau)?.scale(sys.gamma);
    let mut e = DenseMatrix::zeros(r, m);
    let mut x = vec![0.0; m];
    let mut scratch = vec![0.0; m];
    for i in 0..r {
        for j in 0..m {
            x[j] = tau[(i, j)] - tau1[(i, j)];
        }
        n.solve(&mut x, &mut scratch);
        for j in 0..m {
            x[j] += tau1[(i, j)];
        }
        n.solve(&mut x, &mut scratch);
        for j in 0..m {
            e[(i, j)] = x[j];
        }
    }
    let norm = weights.vec_norm(e.row(r - 1));
    Ok(ErrorEstimate {
        e,
        norm,
        f_evals: r,
        row_solves: 2 * r,
    })
}
