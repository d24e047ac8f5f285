use serde::{Deserialize, Serialize};

use super::{assemble_glm, AuxChoice, ConstructionError, GlmTableau};
use crate::linalg::DenseMatrix;

/// Relative tolerance for accepting an imported tableau against a fresh
/// assembly of the same triple.
const IMPORT_TOLERANCE: f64 = 1e-12;

/// JSON form of a [`GlmTableau`]. Real numbers are written with 17
/// significant digits so a round trip is bit-exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableauDocument {
    pub k: usize,
    pub r: usize,
    pub ell: usize,
    pub nu: usize,
    pub choice: AuxChoice,
    pub c: Vec<f64>,
    pub xi: Vec<f64>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "U")]
    pub u: Vec<Vec<f64>>,
    #[serde(rename = "A1")]
    pub a1: Vec<Vec<f64>>,
    #[serde(rename = "A2")]
    pub a2: Vec<Vec<f64>>,
    pub gamma: Option<f64>,
}

fn close(a: &DenseMatrix, b: &[Vec<f64>], what: &str) -> Result<(), ConstructionError> {
    if b.len() != a.rows() || b.iter().any(|row| row.len() != a.cols()) {
        return Err(ConstructionError::Document(format!(
            "{what} has the wrong shape"
        )));
    }
    let scale = a.max_abs().max(1.0);
    for (i, row) in b.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            if !x.is_finite() || (a[(i, j)] - x).abs() > IMPORT_TOLERANCE * scale {
                return Err(ConstructionError::Document(format!(
                    "{what}[{i}][{j}] = {x} disagrees with the assembled value {}",
                    a[(i, j)]
                )));
            }
        }
    }
    Ok(())
}

impl TableauDocument {
    pub fn from_tableau(t: &GlmTableau) -> Self {
        Self {
            k: t.k(),
            r: t.r(),
            ell: t.ell(),
            nu: t.nu(),
            choice: t.choice(),
            c: t.c().to_vec(),
            xi: t.xi().to_vec(),
            a: t.a().to_rows(),
            u: t.u().to_rows(),
            a1: t.a1().to_rows(),
            a2: t.a2().to_rows(),
            gamma: t.gamma(),
        }
    }

    /// Rebuilds the tableau, checking every stored matrix against a fresh
    /// assembly of the same triple.
    pub fn to_tableau(&self) -> Result<GlmTableau, ConstructionError> {
        let t = assemble_glm(self.k, self.r, self.ell, self.choice)?;
        if self.nu != t.nu() {
            return Err(ConstructionError::Document(format!(
                "nu = {} but the triple implies {}",
                self.nu,
                t.nu()
            )));
        }
        let as_rows = |v: &[f64]| vec![v.to_vec()];
        close(
            &DenseMatrix::from_rows(&as_rows(t.c()))?,
            &as_rows(&self.c),
            "c",
        )?;
        close(t.a(), &self.a, "A")?;
        close(t.u(), &self.u, "U")?;
        close(t.a1(), &self.a1, "A1")?;
        close(t.a2(), &self.a2, "A2")?;
        Ok(match self.gamma {
            Some(g) if g.is_finite() && g > 0.0 => t.with_gamma(g),
            Some(g) => {
                return Err(ConstructionError::Document(format!(
                    "gamma must be positive, got {g}"
                )))
            }
            None => t,
        })
    }

    pub fn to_json(&self) -> String {
        crate::json::to_string_sig17(self)
    }

    pub fn from_json(text: &str) -> Result<Self, ConstructionError> {
        serde_json::from_str(text).map_err(|e| ConstructionError::Document(e.to_string()))
    }
}
