//! Eigenvalues by Householder reduction to upper Hessenberg form followed by
//! Wilkinson-shifted complex QR sweeps with Givens rotations.
//!
//! Real input is embedded in the complex field; conjugate pairs come out in
//! pairs up to rounding.

use num_complex::Complex64;

use super::{ComplexMatrix, DenseMatrix, LinalgError};

/// Relative subdiagonal size below which the active window is split.
const DEFLATION_TOL: f64 = 1e-13;

pub fn eigenvalues(m: &DenseMatrix) -> Result<Vec<Complex64>, LinalgError> {
    m.require_square()?;
    let mut mu = complex_eigenvalues(&m.to_complex())?;
    // Clean the rounding noise on real eigenvalues of real matrices.
    let scale = m.max_abs();
    for z in &mut mu {
        if z.im.abs() <= 1e-14 * scale {
            z.im = 0.0;
        }
    }
    Ok(mu)
}

pub fn spectral_radius(m: &DenseMatrix) -> Result<f64, LinalgError> {
    Ok(eigenvalues(m)?.iter().fold(0.0, |r, z| r.max(z.norm())))
}

pub fn complex_spectral_radius(m: &ComplexMatrix) -> Result<f64, LinalgError> {
    Ok(complex_eigenvalues(m)?
        .iter()
        .fold(0.0, |r, z| r.max(z.norm())))
}

pub fn complex_eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>, LinalgError> {
    let n = m.require_square()?;
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let mut h = m.clone();
    reduce_to_hessenberg(&mut h);
    hessenberg_qr(&mut h)
}

fn reduce_to_hessenberg(h: &mut ComplexMatrix) {
    let n = h.rows();
    let zero = Complex64::new(0.0, 0.0);
    let mut v = vec![zero; n];
    for k in 0..n.saturating_sub(2) {
        let norm_x = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * norm_x;
        for i in 0..n {
            v[i] = zero;
        }
        v[k + 1] = x0 - alpha;
        for i in k + 2..n {
            v[i] = h[(i, k)];
        }
        let vnorm = (k + 1..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for vi in v.iter_mut().skip(k + 1) {
            *vi /= vnorm;
        }
        // H <- (I - 2vv*) H
        for j in 0..n {
            let s: Complex64 = (k + 1..n).map(|i| v[i].conj() * h[(i, j)]).sum();
            for i in k + 1..n {
                h[(i, j)] -= v[i] * s * 2.0;
            }
        }
        // H <- H (I - 2vv*)
        for i in 0..n {
            let s: Complex64 = (k + 1..n).map(|j| h[(i, j)] * v[j]).sum();
            for j in k + 1..n {
                h[(i, j)] -= s * v[j].conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = zero;
        }
    }
}

fn hessenberg_qr(h: &mut ComplexMatrix) -> Result<Vec<Complex64>, LinalgError> {
    let n = h.rows();
    let cap = 100 * n * n;
    let norm = h.max_abs();
    let mut eig = Vec::with_capacity(n);
    let mut hi = n - 1;
    let mut sweeps = 0usize;
    let mut since_deflation = 0usize;
    let mut rot = vec![(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); n];

    loop {
        if hi == 0 {
            eig.push(h[(0, 0)]);
            break;
        }
        // Find the start of the unreduced window ending at `hi`.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            let reference = if diag > 0.0 { diag } else { norm };
            if sub <= DEFLATION_TOL * reference || sub <= f64::MIN_POSITIVE {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig.push(h[(hi, hi)]);
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if sweeps >= cap {
            return Err(LinalgError::NoConvergence { sweeps });
        }
        sweeps += 1;
        since_deflation += 1;

        let shift = if since_deflation % 11 == 10 {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(h, hi)
        };

        for i in lo..=hi {
            h[(i, i)] -= shift;
        }
        // H - σI = QR via Givens rotations on rows.
        for j in lo..hi {
            let x = h[(j, j)];
            let y = h[(j + 1, j)];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (c, s) = if r == 0.0 {
                (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
            } else {
                (x / r, y / r)
            };
            rot[j] = (c, s);
            for col in j..=hi {
                let a = h[(j, col)];
                let b = h[(j + 1, col)];
                h[(j, col)] = c.conj() * a + s.conj() * b;
                h[(j + 1, col)] = -s * a + c * b;
            }
        }
        // RQ: apply the adjoint rotations on columns.
        for j in lo..hi {
            let (c, s) = rot[j];
            let top = (j + 2).min(hi);
            for row in lo..=top {
                let a = h[(row, j)];
                let b = h[(row, j + 1)];
                h[(row, j)] = a * c + b * s;
                h[(row, j + 1)] = -a * s.conj() + b * c.conj();
            }
        }
        for i in lo..=hi {
            h[(i, i)] += shift;
        }
    }
    Ok(eig)
}

/// Eigenvalue of the trailing 2x2 block closest to its last diagonal entry.
fn wilkinson_shift(h: &ComplexMatrix, hi: usize) -> Complex64 {
    let a = h[(hi - 1, hi - 1)];
    let b = h[(hi - 1, hi)];
    let c = h[(hi, hi - 1)];
    let d = h[(hi, hi)];
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5) * ((a - d) * 0.5) + b * c;
    let sq = disc.sqrt();
    let l1 = half_tr + sq;
    let l2 = half_tr - sq;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::lu_factor;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap()
                .then(a.im.partial_cmp(&b.im).unwrap())
        });
        v
    }

    #[test]
    fn diagonal_spectrum() {
        let m = DenseMatrix::from_diagonal(&[2.0, 3.0]);
        let e = sorted(eigenvalues(&m).unwrap());
        assert_eq!(e, vec![Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0)]);
    }

    #[test]
    fn rotation_has_imaginary_pair() {
        let m = DenseMatrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]]).unwrap();
        let e = sorted(eigenvalues(&m).unwrap());
        assert!((e[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((e[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn spectral_radius_basics() {
        assert_eq!(spectral_radius(&DenseMatrix::zeros(3, 3)).unwrap(), 0.0);
        let m = DenseMatrix::from_diagonal(&[-5.0, 2.0]);
        assert!((spectral_radius(&m).unwrap() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn companion_matrix_roots() {
        // x^3 - 6x^2 + 11x - 6 = (x-1)(x-2)(x-3)
        let m =
            DenseMatrix::from_rows(&[[6.0, -11.0, 6.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap();
        let e = sorted(eigenvalues(&m).unwrap());
        for (z, want) in e.iter().zip([1.0, 2.0, 3.0]) {
            assert!((z - Complex64::new(want, 0.0)).norm() < 1e-11, "{z}");
        }
    }

    #[test]
    fn random_matrices_satisfy_characteristic_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=11 {
            let data: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let m = DenseMatrix::from_row_major(n, n, data).unwrap();
            let eig = eigenvalues(&m).unwrap();
            assert_eq!(eig.len(), n);
            // smallest singular direction: det(m - μI) must be tiny relative to ‖m‖^n
            let scale = m.norm_inf().max(1.0).powi(n as i32);
            for mu in &eig {
                let shifted = m.to_complex().shift_diagonal(-mu);
                let det = match lu_factor(&shifted) {
                    Ok(lu) => lu.determinant().norm(),
                    Err(_) => 0.0,
                };
                assert!(det <= 1e-9 * scale, "n={n} mu={mu} det={det}");
            }
            // product of moduli equals |det|
            let prod: f64 = eig.iter().map(|z| z.norm()).product();
            let det = lu_factor(&m)
                .map(|lu| lu.determinant().abs())
                .unwrap_or(0.0);
            assert!((prod - det).abs() <= 1e-8 * det.max(1e-300), "n={n}");
        }
    }

    #[test]
    fn complex_input() {
        let m = ComplexMatrix::from_rows(&[
            [Complex64::new(1.0, 1.0), Complex64::new(2.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(-1.0, 3.0)],
        ])
        .unwrap();
        let e = complex_eigenvalues(&m).unwrap();
        assert!(e
            .iter()
            .any(|z| (z - Complex64::new(1.0, 1.0)).norm() < 1e-14));
        assert!(e
            .iter()
            .any(|z| (z - Complex64::new(-1.0, 3.0)).norm() < 1e-14));
    }
}
