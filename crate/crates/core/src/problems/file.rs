use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{OdeProblem, ProblemError};
use crate::linalg::DenseMatrix;

/// Monomial `coef · t^t_power · Π y_i^p` with `(i, p)` pairs in `powers`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub powers: Vec<(usize, u32)>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub t_power: u32,
}

fn is_zero(p: &u32) -> bool {
    *p == 0
}

impl Term {
    pub fn new(coef: f64, powers: &[(usize, u32)]) -> Self {
        Self {
            coef,
            powers: powers.to_vec(),
            t_power: 0,
        }
    }

    fn eval(&self, t: f64, y: &[f64]) -> f64 {
        self.powers
            .iter()
            .fold(self.coef * t.powi(self.t_power as i32), |acc, &(i, p)| {
                acc * y[i].powi(p as i32)
            })
    }

    /// Adds `∂term/∂y_i` into `grad`.
    fn add_gradient(&self, t: f64, y: &[f64], grad: &mut [f64]) {
        let base = self.coef * t.powi(self.t_power as i32);
        for (k, &(i, p)) in self.powers.iter().enumerate() {
            if p == 0 {
                continue;
            }
            let mut d = base * p as f64 * y[i].powi(p as i32 - 1);
            for (l, &(j, q)) in self.powers.iter().enumerate() {
                if l != k {
                    d *= y[j].powi(q as i32);
                }
            }
            grad[i] += d;
        }
    }
}

fn eval_poly(p: &[Term], t: f64, y: &[f64]) -> f64 {
    p.iter().map(|term| term.eval(t, y)).sum()
}

fn grad_poly(p: &[Term], t: f64, y: &[f64], grad: &mut [f64]) {
    grad.iter_mut().for_each(|g| *g = 0.0);
    for term in p {
        term.add_gradient(t, y, grad);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalComponent {
    pub numerator: Vec<Term>,
    pub denominator: Vec<Term>,
}

/// Piecewise polynomial forcing: on `[breaks[p], breaks[p+1])` component `i`
/// equals `Σ_n pieces[p][i][n] (t − breaks[p])^n`. Outside the breaks the
/// first or last piece is extended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePolynomial {
    pub breaks: Vec<f64>,
    pub pieces: Vec<Vec<Vec<f64>>>,
}

impl PiecewisePolynomial {
    fn eval(&self, t: f64, out: &mut [f64]) {
        let last = self.pieces.len() - 1;
        let p = self.breaks[1..last + 1]
            .iter()
            .position(|&b| t < b)
            .unwrap_or(last);
        let s = t - self.breaks[p];
        for (o, coeffs) in out.iter_mut().zip(&self.pieces[p]) {
            *o = coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RhsSpec {
    /// `f_i = P_i(t, y)`.
    Polynomial { components: Vec<Vec<Term>> },
    /// `f_i = P_i(t, y) / Q_i(t, y)`.
    Rational { components: Vec<RationalComponent> },
    /// `f = M y + g(t)`.
    Linear {
        matrix: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        forcing: Option<PiecewisePolynomial>,
    },
}

/// JSON problem description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub name: String,
    pub dimension: usize,
    pub y0: Vec<f64>,
    pub t_span: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h0: Option<f64>,
    pub rhs: RhsSpec,
}

fn invalid(msg: impl Into<String>) -> ProblemError {
    ProblemError::Validation(msg.into())
}

fn check_terms(terms: &[Term], m: usize, what: &str) -> Result<(), ProblemError> {
    for term in terms {
        if !term.coef.is_finite() {
            return Err(invalid(format!("{what}: non-finite coefficient")));
        }
        if let Some(&(i, _)) = term.powers.iter().find(|(i, _)| *i >= m) {
            return Err(invalid(format!(
                "{what}: variable index {i} out of range 0..{m}"
            )));
        }
    }
    Ok(())
}

impl ProblemFile {
    pub fn validate(&self) -> Result<(), ProblemError> {
        let m = self.dimension;
        if m == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if self.y0.len() != m {
            return Err(invalid(format!(
                "y0 has {} entries, dimension is {m}",
                self.y0.len()
            )));
        }
        if self.y0.iter().chain(&self.t_span).any(|v| !v.is_finite()) {
            return Err(invalid("non-finite initial data"));
        }
        if self.t_span[1] <= self.t_span[0] {
            return Err(invalid("t_span must be increasing"));
        }
        for tol in [self.rtol, self.atol, self.h0].into_iter().flatten() {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(invalid("tolerances and h0 must be positive"));
            }
        }
        match &self.rhs {
            RhsSpec::Polynomial { components } => {
                if components.len() != m {
                    return Err(invalid(format!(
                        "{} components for dimension {m}",
                        components.len()
                    )));
                }
                for (i, c) in components.iter().enumerate() {
                    check_terms(c, m, &format!("component {i}"))?;
                }
            }
            RhsSpec::Rational { components } => {
                if components.len() != m {
                    return Err(invalid(format!(
                        "{} components for dimension {m}",
                        components.len()
                    )));
                }
                for (i, c) in components.iter().enumerate() {
                    check_terms(&c.numerator, m, &format!("numerator {i}"))?;
                    check_terms(&c.denominator, m, &format!("denominator {i}"))?;
                    if c.denominator.is_empty() {
                        return Err(invalid(format!("denominator {i} is empty")));
                    }
                    let q = eval_poly(&c.denominator, self.t_span[0], &self.y0);
                    if q == 0.0 || !q.is_finite() {
                        return Err(invalid(format!(
                            "denominator {i} vanishes at the initial point"
                        )));
                    }
                }
            }
            RhsSpec::Linear { matrix, forcing } => {
                if matrix.len() != m || matrix.iter().any(|r| r.len() != m) {
                    return Err(invalid(format!("matrix must be {m}x{m}")));
                }
                if matrix.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(invalid("matrix has non-finite entries"));
                }
                if let Some(g) = forcing {
                    if g.breaks.len() < 2 || g.pieces.len() != g.breaks.len() - 1 {
                        return Err(invalid("forcing needs n+1 breaks for n pieces"));
                    }
                    if g.breaks.windows(2).any(|w| !(w[0] < w[1])) {
                        return Err(invalid("forcing breaks must be increasing"));
                    }
                    if g.pieces.iter().any(|p| p.len() != m) {
                        return Err(invalid(format!("every forcing piece needs {m} components")));
                    }
                    if g.pieces.iter().flatten().flatten().any(|v| !v.is_finite()) {
                        return Err(invalid("forcing has non-finite coefficients"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Builds the problem, with a Jacobian derived from the description.
    pub fn to_problem(&self) -> Result<OdeProblem, ProblemError> {
        self.validate()?;
        let m = self.dimension;
        let span = (self.t_span[0], self.t_span[1]);
        let problem = match self.rhs.clone() {
            RhsSpec::Polynomial { components } => {
                let jc = components.clone();
                OdeProblem::new(self.name.clone(), self.y0.clone(), span, move |t, y, dy| {
                    for (d, c) in dy.iter_mut().zip(&components) {
                        *d = eval_poly(c, t, y);
                    }
                })
                .with_jacobian(move |t, y, jac| {
                    let mut g = vec![0.0; m];
                    for (i, c) in jc.iter().enumerate() {
                        grad_poly(c, t, y, &mut g);
                        for j in 0..m {
                            jac[(i, j)] = g[j];
                        }
                    }
                })
            }
            RhsSpec::Rational { components } => {
                let jc = components.clone();
                OdeProblem::new(self.name.clone(), self.y0.clone(), span, move |t, y, dy| {
                    for (d, c) in dy.iter_mut().zip(&components) {
                        *d = eval_poly(&c.numerator, t, y) / eval_poly(&c.denominator, t, y);
                    }
                })
                .with_jacobian(move |t, y, jac| {
                    let mut gp = vec![0.0; m];
                    let mut gq = vec![0.0; m];
                    for (i, c) in jc.iter().enumerate() {
                        let p = eval_poly(&c.numerator, t, y);
                        let q = eval_poly(&c.denominator, t, y);
                        grad_poly(&c.numerator, t, y, &mut gp);
                        grad_poly(&c.denominator, t, y, &mut gq);
                        for j in 0..m {
                            jac[(i, j)] = (gp[j] * q - p * gq[j]) / (q * q);
                        }
                    }
                })
            }
            RhsSpec::Linear { matrix, forcing } => {
                let mat =
                    DenseMatrix::from_rows(&matrix).map_err(|e| invalid(format!("matrix: {e}")))?;
                let jm = mat.clone();
                OdeProblem::new(self.name.clone(), self.y0.clone(), span, move |t, y, dy| {
                    if let Some(g) = &forcing {
                        g.eval(t, dy);
                    } else {
                        dy.iter_mut().for_each(|d| *d = 0.0);
                    }
                    for (i, d) in dy.iter_mut().enumerate() {
                        *d += mat.row(i).iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
                    }
                })
                .with_jacobian(move |_, _, jac| {
                    for i in 0..m {
                        for j in 0..m {
                            jac[(i, j)] = jm[(i, j)];
                        }
                    }
                })
            }
        };
        let mut problem = problem.with_file(self.clone());
        if let Some(r) = self.rtol {
            problem.rtol = r;
        }
        if let Some(a) = self.atol {
            problem.atol = a;
        }
        problem.h0 = self.h0;
        problem.validate()?;
        Ok(problem)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem file serializes")
    }
}

pub fn ingest_str(text: &str) -> Result<OdeProblem, ProblemError> {
    let file: ProblemFile =
        serde_json::from_str(text).map_err(|e| ProblemError::Parse(e.to_string()))?;
    file.to_problem()
}

pub fn ingest(path: impl AsRef<Path>) -> Result<OdeProblem, ProblemError> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| ProblemError::Io(format!("{}: {e}", path.as_ref().display())))?;
    ingest_str(&text)
}
