use serde::Serialize;

use super::AnalysisError;
use crate::construction::{GlmTableau, MethodId};
use crate::linalg::{complex_spectral_radius, lu_factor, Complex64, ComplexMatrix, DenseMatrix};

/// Points on the positive imaginary axis sampled by [`check_stability`].
pub const IMAG_AXIS_SAMPLES: usize = 2000;
/// `|q|` at which the stiff limit is probed.
pub const LARGE_Q: f64 = 1e8;

const A_STABLE_SLACK: f64 = 1e-9;
const L_STABLE_LIMIT: f64 = 1e-6;

/// A method applied to `y' = λy` propagates `y_new = (I − qA)⁻¹ U y_old`.
pub trait LinearMethod: Sync {
    fn stage_matrix(&self) -> &DenseMatrix;
    fn input_matrix(&self) -> &DenseMatrix;
    fn blended_gamma(&self) -> Option<f64> {
        None
    }
    fn method_id(&self) -> Option<MethodId> {
        None
    }
}

impl LinearMethod for GlmTableau {
    fn stage_matrix(&self) -> &DenseMatrix {
        self.a()
    }
    fn input_matrix(&self) -> &DenseMatrix {
        self.u()
    }
    fn blended_gamma(&self) -> Option<f64> {
        self.gamma()
    }
    fn method_id(&self) -> Option<MethodId> {
        Some(self.id())
    }
}

/// A bare `(A, U)` pair, e.g. for toy methods.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixMethod {
    pub a: DenseMatrix,
    pub u: DenseMatrix,
}

impl MatrixMethod {
    pub fn new(a: DenseMatrix, u: DenseMatrix) -> Result<Self, AnalysisError> {
        if !a.is_square() || a.shape() != u.shape() {
            return Err(AnalysisError::Shape);
        }
        Ok(Self { a, u })
    }
}

impl LinearMethod for MatrixMethod {
    fn stage_matrix(&self) -> &DenseMatrix {
        &self.a
    }
    fn input_matrix(&self) -> &DenseMatrix {
        &self.u
    }
}

/// `R(q) = (I − qA)⁻¹U`.
pub fn stability_matrix<M: LinearMethod + ?Sized>(
    method: &M,
    q: Complex64,
) -> Result<ComplexMatrix, AnalysisError> {
    let a = method.stage_matrix();
    let n = a.rows();
    let m = ComplexMatrix::identity(n).sub(&a.to_complex().scale(q))?;
    let lu = lu_factor(&m).map_err(|_| AnalysisError::SingularAtQ { re: q.re, im: q.im })?;
    Ok(lu.solve_matrix(&method.input_matrix().to_complex())?)
}

/// `ρ(R(q))`, or `+∞` where `I − qA` is singular.
pub fn stability_radius<M: LinearMethod + ?Sized>(method: &M, q: Complex64) -> f64 {
    match stability_matrix(method, q) {
        Ok(r) => complex_spectral_radius(&r).unwrap_or(f64::INFINITY),
        Err(_) => f64::INFINITY,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<MethodId>,
    pub max_imag_axis_radius: f64,
    /// `x` at which the imaginary-axis maximum was attained.
    pub argmax_imag: f64,
    pub radius_at_large_q: f64,
    pub a_stable: bool,
    pub l_stable: bool,
}

/// Samples `ρ(R(ix))` on 2000 log-spaced `x ∈ [1e-3, 1e6]` (plus `x = 1/γ`
/// when `γ` is known) and `ρ(R(−1e8))`.
pub fn check_stability<M: LinearMethod + ?Sized>(method: &M) -> StabilityReport {
    let n = IMAG_AXIS_SAMPLES;
    let mut xs: Vec<f64> = (0..n)
        .map(|i| 10f64.powf(-3.0 + 9.0 * i as f64 / (n - 1) as f64))
        .collect();
    if let Some(g) = method.blended_gamma() {
        xs.push(1.0 / g);
    }
    let (mut max_r, mut arg) = (0.0_f64, xs[0]);
    for &x in &xs {
        let rho = stability_radius(method, Complex64::new(0.0, x));
        if !(rho <= max_r) {
            max_r = rho;
            arg = x;
        }
    }
    let large = stability_radius(method, Complex64::new(-LARGE_Q, 0.0));
    let a_stable = max_r <= 1.0 + A_STABLE_SLACK;
    StabilityReport {
        method: method.method_id(),
        max_imag_axis_radius: max_r,
        argmax_imag: arg,
        radius_at_large_q: large,
        a_stable,
        l_stable: a_stable && large <= L_STABLE_LIMIT,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{assemble_bdf_block, assemble_glm, AuxChoice};

    #[test]
    fn zero_q_gives_input_matrix() {
        let t = assemble_glm(4, 4, 3, AuxChoice::Rational).unwrap();
        let r = stability_matrix(&t, Complex64::new(0.0, 0.0)).unwrap();
        assert!(r.sub(&t.u().to_complex()).unwrap().max_abs() < 1e-15);
        assert!((stability_radius(&t, Complex64::new(0.0, 0.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn third_order_is_l_stable() {
        let t = assemble_glm(3, 2, 2, AuxChoice::None).unwrap();
        assert!(stability_radius(&t, Complex64::new(-1.0, 0.0)) < 1.0);
        let rep = check_stability(&t);
        assert!(rep.a_stable && rep.l_stable, "{rep:?}");
    }

    #[test]
    fn bdf3_block_is_not_a_stable() {
        let rep = check_stability(&assemble_bdf_block(3).unwrap());
        assert!(!rep.a_stable);
        assert!(rep.max_imag_axis_radius > 1.1);
    }

    #[test]
    fn growing_input_matrix_fails() {
        let m = MatrixMethod::new(DenseMatrix::identity(1), DenseMatrix::from_diagonal(&[1.5]))
            .unwrap();
        let rep = check_stability(&m);
        assert!(!rep.a_stable);
        assert!((rep.max_imag_axis_radius - 1.5).abs() < 1e-5);
    }

    #[test]
    fn singular_point_is_reported() {
        let m = MatrixMethod::new(DenseMatrix::identity(1), DenseMatrix::identity(1)).unwrap();
        assert!(matches!(
            stability_matrix(&m, Complex64::new(1.0, 0.0)),
            Err(AnalysisError::SingularAtQ { .. })
        ));
        assert_eq!(
            stability_radius(&m, Complex64::new(1.0, 0.0)),
            f64::INFINITY
        );
    }
}
