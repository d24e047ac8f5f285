use super::BlendedError;
use crate::construction::GlmTableau;
use crate::linalg::{lu_factor, Complex64, DenseMatrix};

const DIVERGENCE_NORM: f64 = 1e12;

fn real_times(m: &DenseMatrix, x: &[Complex64]) -> Vec<Complex64> {
    (0..m.rows())
        .map(|i| {
            m.row(i)
                .iter()
                .zip(x)
                .fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + *a * *b)
        })
        .collect()
}

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// One blended sweep on the test equation:
///
/// ```text
/// r₁ = (I − γA⁻¹)(y − η) − q(A − γI)y
/// r₂ = A⁻¹(y − η) − qy
/// y ← y − θ(θr₁ + γr₂),   θ = 1/(1 − γq)
/// ```
pub fn scalar_sweep(
    a: &DenseMatrix,
    a_inv: &DenseMatrix,
    gamma: f64,
    q: Complex64,
    eta: &[Complex64],
    y: &[Complex64],
) -> Vec<Complex64> {
    let theta = 1.0 / (Complex64::new(1.0, 0.0) - gamma * q);
    let d: Vec<Complex64> = y.iter().zip(eta).map(|(a, b)| a - b).collect();
    let ainv_d = real_times(a_inv, &d);
    let ay = real_times(a, y);
    (0..y.len())
        .map(|i| {
            let r1 = d[i] - gamma * ainv_d[i] - q * (ay[i] - gamma * y[i]);
            let r2 = ainv_d[i] - q * y[i];
            y[i] - theta * (theta * r1 + gamma * r2)
        })
        .collect()
}

/// Iterates `y⁽⁰⁾, y⁽¹⁾, …` of a blended run.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateHistory {
    pub iterates: Vec<Vec<Complex64>>,
}

impl IterateHistory {
    pub fn last(&self) -> &[Complex64] {
        self.iterates
            .last()
            .expect("history holds the initial guess")
    }

    pub fn sweeps(&self) -> usize {
        self.iterates.len() - 1
    }

    /// Norms `‖y⁽ⁱ⁺¹⁾ − y⁽ⁱ⁾‖`.
    pub fn increments(&self) -> Vec<f64> {
        self.iterates
            .windows(2)
            .map(|w| {
                let d: Vec<Complex64> = w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect();
                norm(&d)
            })
            .collect()
    }

    /// Geometric-mean increment ratio over the second half of the sweeps whose
    /// increments stay above the rounding floor. `None` with fewer than two
    /// usable increments.
    pub fn contraction_ratio(&self) -> Option<f64> {
        let inc = self.increments();
        let scale = norm(self.last()).max(1.0);
        let usable = inc.iter().take_while(|&&d| d > 1e-13 * scale).count();
        if usable < 2 {
            return None;
        }
        let first = usable / 2;
        let last = usable - 1;
        if last == first {
            return Some(inc[last] / inc[last - 1]);
        }
        Some((inc[last] / inc[first]).powf(1.0 / (last - first) as f64))
    }
}

/// Runs `sweeps` blended sweeps from `y0` with explicit `A` and `γ`.
pub fn scalar_blended_iterate_from(
    a: &DenseMatrix,
    gamma: f64,
    q: Complex64,
    eta: &[Complex64],
    y0: &[Complex64],
    sweeps: usize,
) -> Result<IterateHistory, BlendedError> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(BlendedError::BadGamma(gamma));
    }
    if (Complex64::new(1.0, 0.0) - gamma * q).norm() == 0.0 {
        return Err(BlendedError::SingularWeight);
    }
    let a_inv = lu_factor(a)?.inverse();
    let mut iterates = vec![y0.to_vec()];
    for sweep in 1..=sweeps {
        let next = scalar_sweep(a, &a_inv, gamma, q, eta, iterates.last().unwrap());
        let n = norm(&next);
        if !(n <= DIVERGENCE_NORM) {
            return Err(BlendedError::Divergence { sweep, norm: n });
        }
        iterates.push(next);
    }
    Ok(IterateHistory { iterates })
}

/// Blended iteration for `(I − qA)y = η` started from `y⁽⁰⁾ = η`, using the
/// tableau's `A` and `γ`.
pub fn scalar_blended_iterate(
    tableau: &GlmTableau,
    q: Complex64,
    eta: &[Complex64],
    sweeps: usize,
) -> Result<IterateHistory, BlendedError> {
    let gamma = tableau.gamma().ok_or(BlendedError::MissingGamma)?;
    scalar_blended_iterate_from(tableau.a(), gamma, q, eta, eta, sweeps)
}

/// Asymptotic contraction factor of the sweep map, measured on the
/// homogeneous problem (`η = 0`, fixed point 0) with the iterate rescaled
/// every sweep so that long runs never reach the rounding floor. Returns the
/// geometric mean of the per-sweep norm ratios over the last half.
pub fn contraction_estimate(
    a: &DenseMatrix,
    gamma: f64,
    q: Complex64,
    y0: &[Complex64],
    sweeps: usize,
) -> Result<f64, BlendedError> {
    let a_inv = lu_factor(a)?.inverse();
    let zero = vec![Complex64::new(0.0, 0.0); y0.len()];
    let mut y: Vec<Complex64> = y0.to_vec();
    let n0 = norm(&y);
    if n0 == 0.0 {
        return Ok(0.0);
    }
    y.iter_mut().for_each(|z| *z /= n0);
    let mut log_sum = 0.0;
    let mut counted = 0;
    for sweep in 0..sweeps {
        let next = scalar_sweep(a, &a_inv, gamma, q, &zero, &y);
        let n = norm(&next);
        if n == 0.0 {
            return Ok(0.0);
        }
        if sweep >= sweeps / 2 {
            log_sum += n.ln();
            counted += 1;
        }
        y = next.into_iter().map(|z| z / n).collect();
    }
    Ok((log_sum / counted.max(1) as f64).exp())
}
