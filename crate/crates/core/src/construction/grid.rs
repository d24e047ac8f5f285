use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ConstructionError;
use crate::linalg::positive_poly_root;

/// Placement of the auxiliary block points (those between `c_{ℓ−1}` and
/// `c_r = ℓ` that are not carried to the next step).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuxChoice {
    /// Uniform block, only valid when `ℓ = r`.
    None,
    /// Stepsize fractions `ξ_m = ζ^{m+1}` with `ζ` the positive root of
    /// `Σ_{m=0}^{r−ℓ} z^{m+1} − 1`; irrational coefficients.
    Geometric,
    /// Stepsize fractions `ξ_m = 2^{r−ℓ−m}/(2^{r−ℓ+1} − 1)`; rational
    /// coefficients.
    Rational,
}

impl AuxChoice {
    /// Numeric code used on the command line and in tables (0, 1, 2).
    pub fn code(self) -> u8 {
        match self {
            AuxChoice::None => 0,
            AuxChoice::Geometric => 1,
            AuxChoice::Rational => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(AuxChoice::None),
            1 => Some(AuxChoice::Geometric),
            2 => Some(AuxChoice::Rational),
            _ => None,
        }
    }
}

impl fmt::Display for AuxChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

impl FromStr for AuxChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "0" | "none" => Ok(AuxChoice::None),
            "1" | "geometric" => Ok(AuxChoice::Geometric),
            "2" | "rational" => Ok(AuxChoice::Rational),
            other => Err(format!("unknown auxiliary-point choice '{other}'")),
        }
    }
}

/// Block abscissae `c_1..c_r` and the stepsize fractions `ξ_0..ξ_{r−ℓ}` of
/// the last `r−ℓ+1` substeps. `c_i = i` for `i < ℓ` and `c_r = ℓ` exactly.
pub fn abscissae(
    k: usize,
    r: usize,
    ell: usize,
    choice: AuxChoice,
) -> Result<(Vec<f64>, Vec<f64>), ConstructionError> {
    if k == 0 {
        return Err(ConstructionError::invalid(
            k,
            r,
            ell,
            "order must be positive",
        ));
    }
    if ell == 0 || ell > r {
        return Err(ConstructionError::invalid(k, r, ell, "need 1 <= ell <= r"));
    }
    let d = r - ell;
    let xi: Vec<f64> = match choice {
        AuxChoice::None if d > 0 => {
            return Err(ConstructionError::invalid(
                k,
                r,
                ell,
                "auxiliary points require the geometric or rational choice",
            ))
        }
        _ if d == 0 => vec![1.0],
        AuxChoice::Geometric => {
            let mut coeffs = vec![1.0; d + 2];
            coeffs[0] = -1.0;
            let zeta = positive_poly_root(&coeffs)?;
            (0..=d).map(|m| zeta.powi(m as i32 + 1)).collect()
        }
        AuxChoice::Rational => {
            let denom = (2u64.pow(d as u32 + 1) - 1) as f64;
            (0..=d)
                .map(|m| 2u64.pow((d - m) as u32) as f64 / denom)
                .collect()
        }
        AuxChoice::None => unreachable!(),
    };
    let mut c: Vec<f64> = (1..ell).map(|i| i as f64).collect();
    let mut acc = 0.0;
    for x in &xi {
        acc += x;
        c.push((ell - 1) as f64 + acc);
    }
    // the last fraction closes the sum exactly
    *c.last_mut().expect("r >= 1") = ell as f64;
    Ok((c, xi))
}
