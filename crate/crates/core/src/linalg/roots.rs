use super::LinalgError;

fn horner(coeffs: &[f64], z: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Root in `(0, 1]` of `p(z) = Σ coeffs[i]·z^i`, by bisection refined with
/// Newton.
pub fn positive_poly_root(coeffs: &[f64]) -> Result<f64, LinalgError> {
    let (p0, _) = horner(coeffs, 0.0);
    let (p1, _) = horner(coeffs, 1.0);
    if p1 == 0.0 {
        return Ok(1.0);
    }
    if p0 == 0.0 || p0.signum() == p1.signum() || !p0.is_finite() || !p1.is_finite() {
        return Err(LinalgError::NoSignChange);
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let lo_sign = p0.signum();
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let (pm, _) = horner(coeffs, mid);
        if pm == 0.0 {
            return Ok(mid);
        }
        if pm.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut z = 0.5 * (lo + hi);
    for _ in 0..4 {
        let (p, dp) = horner(coeffs, z);
        if dp == 0.0 {
            break;
        }
        let next = z - p / dp;
        if !(lo..=hi).contains(&next) {
            break;
        }
        z = next;
    }
    Ok(z)
}
