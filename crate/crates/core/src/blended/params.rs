use serde::Serialize;

use super::BlendedError;
use crate::linalg::{
    eigenvalues, lu_factor, spectral_radius, Complex64, ComplexMatrix, DenseMatrix,
};

/// Convergence factors of the blended iteration at a given `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlendedParams {
    pub gamma: f64,
    /// `ρ̃ = ρ(W)`, nonstiff amplification factor.
    pub rho_tilde: f64,
    /// `ρ∞ = ρ̃/γ²`, stiff convergence factor.
    pub rho_inf: f64,
    /// `ρ* = ρ̃/(2γ)`, maximum amplification factor on the imaginary axis.
    pub rho_star: f64,
    /// Smallest eigenvalue modulus of `A`.
    pub gamma_star: f64,
}

impl BlendedParams {
    /// `ρ(q) = |q| / |1 − γq|² · ρ̃`, the spectral radius of `Z(q)`.
    pub fn rho_at(&self, q: Complex64) -> f64 {
        let d = (Complex64::new(1.0, 0.0) - self.gamma * q).norm_sqr();
        if d == 0.0 {
            return f64::INFINITY;
        }
        q.norm() / d * self.rho_tilde
    }

    /// L-convergence on the whole left half-plane.
    pub fn is_a_convergent(&self) -> bool {
        self.rho_star <= 1.0
    }
}

fn check_gamma(gamma: f64) -> Result<(), BlendedError> {
    if gamma.is_finite() && gamma > 0.0 {
        Ok(())
    } else {
        Err(BlendedError::BadGamma(gamma))
    }
}

/// `W = A⁻¹(A − γI)²`.
pub fn iteration_core(a: &DenseMatrix, gamma: f64) -> Result<DenseMatrix, BlendedError> {
    check_gamma(gamma)?;
    let shifted = a.shift_diagonal(-gamma);
    let sq = shifted.matmul(&shifted)?;
    Ok(lu_factor(a)?.solve_matrix(&sq)?)
}

/// `Z(q) = q/(1 − γq)² · W`.
pub fn z_matrix(a: &DenseMatrix, gamma: f64, q: Complex64) -> Result<ComplexMatrix, BlendedError> {
    let w = iteration_core(a, gamma)?;
    let d = Complex64::new(1.0, 0.0) - gamma * q;
    if d.norm() == 0.0 {
        return Err(BlendedError::SingularWeight);
    }
    let s = q / (d * d);
    Ok(w.to_complex().scale(s))
}

/// `γ* = min |μ|` over the eigenvalues of `A`.
pub fn gamma_star(a: &DenseMatrix) -> Result<f64, BlendedError> {
    Ok(eigenvalues(a)?
        .iter()
        .map(|z| z.norm())
        .fold(f64::INFINITY, f64::min))
}

pub fn convergence_params(a: &DenseMatrix, gamma: f64) -> Result<BlendedParams, BlendedError> {
    let gs = gamma_star(a)?;
    params_with_star(a, gamma, gs)
}

fn params_with_star(a: &DenseMatrix, gamma: f64, gs: f64) -> Result<BlendedParams, BlendedError> {
    let rho_tilde = spectral_radius(&iteration_core(a, gamma)?)?;
    Ok(BlendedParams {
        gamma,
        rho_tilde,
        rho_inf: rho_tilde / (gamma * gamma),
        rho_star: rho_tilde / (2.0 * gamma),
        gamma_star: gs,
    })
}

/// Raised when the coarse scan of `ρ*(γ)` finds several distinct local
/// minima.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonConvexWarning {
    /// `(γ, ρ*)` of every refined local minimum, in increasing `γ`.
    pub minima: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaOptimum {
    pub params: BlendedParams,
    pub warning: Option<NonConvexWarning>,
}

const SCAN_POINTS: usize = 200;
const GOLDEN_TOL: f64 = 1e-10;
const DISTINCT_MINIMA: f64 = 1e-6;

fn golden_section(
    f: &dyn Fn(f64) -> Result<f64, BlendedError>,
    mut lo: f64,
    mut hi: f64,
) -> Result<f64, BlendedError> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > GOLDEN_TOL {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Minimizes `ρ*(γ)` over `[0.1γ*, 10γ*]`: a log-spaced scan brackets every
/// local minimum, each is refined by golden section, and the one with the
/// smallest `γ` among those within `1e-6` of the best `ρ*` is returned.
pub fn optimize_gamma(a: &DenseMatrix) -> Result<GammaOptimum, BlendedError> {
    for mu in eigenvalues(a)? {
        if mu.re <= 0.0 {
            return Err(BlendedError::SpectrumNotPositive {
                re: mu.re,
                im: mu.im,
            });
        }
    }
    minimize_rho_star(a)
}

/// [`optimize_gamma`] without the requirement that the spectrum of `A` lie
/// in the right half-plane. The result still minimizes `ρ*`, but the
/// iteration is then not A-convergent. Used for the starting block of order
/// 6 and above, whose matrix has eigenvalues with negative real part.
pub fn optimize_gamma_unchecked(a: &DenseMatrix) -> Result<GammaOptimum, BlendedError> {
    minimize_rho_star(a)
}

fn minimize_rho_star(a: &DenseMatrix) -> Result<GammaOptimum, BlendedError> {
    let gs = gamma_star(a)?;
    let rho_star =
        |g: f64| -> Result<f64, BlendedError> { Ok(params_with_star(a, g, gs)?.rho_star) };
    let (lo, hi) = (0.1 * gs, 10.0 * gs);
    let xs: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| lo * (hi / lo).powf(i as f64 / (SCAN_POINTS - 1) as f64))
        .collect();
    let fs = xs
        .iter()
        .map(|&x| rho_star(x))
        .collect::<Result<Vec<_>, _>>()?;
    let mut minima: Vec<(f64, f64)> = Vec::new();
    for i in 0..SCAN_POINTS {
        let left = i == 0 || fs[i] <= fs[i - 1];
        let right = i == SCAN_POINTS - 1 || fs[i] < fs[i + 1];
        if left && right {
            let a_br = xs[i.saturating_sub(1)];
            let b_br = xs[(i + 1).min(SCAN_POINTS - 1)];
            let g = golden_section(&rho_star, a_br, b_br)?;
            // the coarse seed γ* is often the exact minimizer (a kink of ρ̃)
            let (g, v) = if (a_br..=b_br).contains(&gs) && rho_star(gs)? <= rho_star(g)? {
                (gs, rho_star(gs)?)
            } else {
                (g, rho_star(g)?)
            };
            minima.push((g, v));
        }
    }
    let best = minima.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    let distinct = minima
        .iter()
        .filter(|m| m.1 - best > DISTINCT_MINIMA)
        .count();
    let chosen = minima
        .iter()
        .find(|m| m.1 - best <= DISTINCT_MINIMA)
        .copied()
        .expect("scan has a minimum");
    let warning = (distinct > 0).then(|| NonConvexWarning {
        minima: minima.clone(),
    });
    Ok(GammaOptimum {
        params: params_with_star(a, chosen.0, gs)?,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{assemble_glm, AuxChoice};

    fn a322() -> DenseMatrix {
        assemble_glm(3, 2, 2, AuxChoice::None).unwrap().a().clone()
    }

    #[test]
    fn scalar_multiple_of_identity_cancels() {
        let a = DenseMatrix::identity(3).scale(0.7);
        let w = iteration_core(&a, 0.7).unwrap();
        assert_eq!(w.max_abs(), 0.0);
        let p = convergence_params(&a, 0.7).unwrap();
        assert_eq!((p.rho_tilde, p.rho_inf, p.rho_star), (0.0, 0.0, 0.0));
        assert_eq!(
            z_matrix(&a, 0.7, Complex64::new(0.0, 0.0))
                .unwrap()
                .max_abs(),
            0.0
        );
    }

    #[test]
    fn third_order_reference_row() {
        let a = a322();
        assert!((gamma_star(&a).unwrap() - 0.7223).abs() < 5e-5);
        let p = convergence_params(&a, 0.7223).unwrap();
        assert!((p.rho_tilde - 0.2272).abs() < 5e-5);
        let opt = optimize_gamma(&a).unwrap();
        assert!((opt.params.gamma - 0.7223).abs() < 5e-4);
        assert!((opt.params.gamma - opt.params.gamma_star).abs() < 1e-6);
        assert!(opt.warning.is_none());
    }

    #[test]
    fn fourth_order_optimum_differs_from_gamma_star() {
        let a = assemble_glm(4, 4, 3, AuxChoice::Rational)
            .unwrap()
            .a()
            .clone();
        let opt = optimize_gamma(&a).unwrap();
        assert!((opt.params.gamma - 0.6249).abs() < 5e-4);
        assert!((opt.params.gamma - opt.params.gamma_star).abs() > 1e-3);
    }

    #[test]
    fn identity_optimum_is_one() {
        let opt = optimize_gamma(&DenseMatrix::identity(2)).unwrap();
        assert!((opt.params.gamma - 1.0).abs() < 1e-9);
        assert!(opt.params.rho_star < 1e-12);
    }

    #[test]
    fn left_half_plane_spectrum_rejected() {
        let a = DenseMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(matches!(
            optimize_gamma(&a),
            Err(BlendedError::SpectrumNotPositive { .. })
        ));
    }

    #[test]
    fn imaginary_axis_maximum() {
        let a = assemble_glm(6, 5, 4, AuxChoice::Rational)
            .unwrap()
            .a()
            .clone();
        let p = optimize_gamma(&a).unwrap().params;
        let at = p.rho_at(Complex64::new(0.0, 1.0 / p.gamma));
        assert!((at - p.rho_star).abs() < 1e-12);
        for x in [0.1, 0.5, 1.0, 3.0, 10.0] {
            assert!(p.rho_at(Complex64::new(0.0, x)) <= p.rho_star + 1e-15);
        }
    }
}
