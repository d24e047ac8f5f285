//! Test problems `y' = f(t, y)`: built-in stiff systems, problems read from
//! JSON descriptions, and reference solutions for accuracy measurements.

mod builtin;
mod file;
mod reference;

pub use builtin::{
    builtin, linear_test, pollution, prothero_robinson, robertson, vanderpol, BUILTIN_NAMES,
};
pub use file::{
    ingest, ingest_str, PiecewisePolynomial, ProblemFile, RationalComponent, RhsSpec, Term,
};
pub use reference::{
    reference_solution, scd, Provenance, Reference, ReferenceCache, ReferenceEntry,
    SELF_REFERENCE_AGREEMENT, SELF_REFERENCE_ORDERS, SELF_REFERENCE_RTOL,
};

use std::fmt;
use std::sync::Arc;

use crate::linalg::DenseMatrix;

type RhsFn = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;
type JacFn = dyn Fn(f64, &[f64], &mut DenseMatrix) + Send + Sync;
type ExactFn = dyn Fn(f64) -> Vec<f64> + Send + Sync;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("unknown problem '{0}' (known: {known})", known = BUILTIN_NAMES.join(", "))]
    UnknownProblem(String),
    #[error("cannot parse problem file: {0}")]
    Parse(String),
    #[error("invalid problem: {0}")]
    Validation(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("no reference solution for '{problem}' at t = {t}: {reason}")]
    NoReference {
        problem: String,
        t: f64,
        reason: String,
    },
}

/// An initial value problem with its recommended tolerances.
#[derive(Clone)]
pub struct OdeProblem {
    pub name: String,
    pub y0: Vec<f64>,
    pub t0: f64,
    pub t_end: f64,
    pub rtol: f64,
    pub atol: f64,
    pub h0: Option<f64>,
    rhs: Arc<RhsFn>,
    jac: Option<Arc<JacFn>>,
    exact: Option<Arc<ExactFn>>,
    file: Option<ProblemFile>,
}

impl fmt::Debug for OdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OdeProblem")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("span", &(self.t0, self.t_end))
            .field("jacobian", &self.jac.is_some())
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl OdeProblem {
    pub fn new(
        name: impl Into<String>,
        y0: Vec<f64>,
        span: (f64, f64),
        rhs: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            y0,
            t0: span.0,
            t_end: span.1,
            rtol: 1e-6,
            atol: 1e-6,
            h0: None,
            rhs: Arc::new(rhs),
            jac: None,
            exact: None,
            file: None,
        }
    }

    pub fn with_jacobian(
        mut self,
        jac: impl Fn(f64, &[f64], &mut DenseMatrix) + Send + Sync + 'static,
    ) -> Self {
        self.jac = Some(Arc::new(jac));
        self
    }

    pub fn with_exact(mut self, exact: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.exact = Some(Arc::new(exact));
        self
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn with_h0(mut self, h0: f64) -> Self {
        self.h0 = Some(h0);
        self
    }

    pub fn with_span(mut self, t0: f64, t_end: f64) -> Self {
        self.t0 = t0;
        self.t_end = t_end;
        self
    }

    pub(crate) fn with_file(mut self, file: ProblemFile) -> Self {
        self.file = Some(file);
        self
    }

    pub fn dim(&self) -> usize {
        self.y0.len()
    }

    pub fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        (self.rhs)(t, y, dy)
    }

    pub fn has_jacobian(&self) -> bool {
        self.jac.is_some()
    }

    /// Writes the analytic Jacobian into `out`; `false` when none is known.
    pub fn jacobian(&self, t: f64, y: &[f64], out: &mut DenseMatrix) -> bool {
        match &self.jac {
            Some(j) => {
                j(t, y, out);
                true
            }
            None => false,
        }
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn exact(&self, t: f64) -> Option<Vec<f64>> {
        self.exact.as_ref().map(|e| e(t))
    }

    /// The JSON description this problem was built from, if any.
    pub fn file(&self) -> Option<&ProblemFile> {
        self.file.as_ref()
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.y0.is_empty() {
            return Err(ProblemError::Validation(
                "dimension must be at least 1".into(),
            ));
        }
        if !(self.t0.is_finite() && self.t_end.is_finite() && self.t_end > self.t0) {
            return Err(ProblemError::Validation(format!(
                "time span [{}, {}] must be finite and increasing",
                self.t0, self.t_end
            )));
        }
        if self.y0.iter().any(|v| !v.is_finite()) {
            return Err(ProblemError::Validation(
                "initial value is not finite".into(),
            ));
        }
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(ProblemError::Validation(
                "tolerances must be positive".into(),
            ));
        }
        let mut dy = vec![0.0; self.dim()];
        self.rhs(self.t0, &self.y0, &mut dy);
        if dy.iter().any(|v| !v.is_finite()) {
            return Err(ProblemError::Validation(
                "right-hand side is not finite at the initial point".into(),
            ));
        }
        Ok(())
    }
}

/// Forward-difference Jacobian with increments `√ε·max(|y_j|, atol)`.
/// Returns the number of right-hand-side evaluations used.
pub fn finite_difference_jacobian(
    problem: &OdeProblem,
    t: f64,
    y: &[f64],
    f0: &[f64],
    atol: f64,
    out: &mut DenseMatrix,
) -> usize {
    let m = y.len();
    let sqrt_eps = f64::EPSILON.sqrt();
    let mut yp = y.to_vec();
    let mut fp = vec![0.0; m];
    for j in 0..m {
        let delta = sqrt_eps * y[j].abs().max(atol);
        yp[j] = y[j] + delta;
        let delta = yp[j] - y[j];
        problem.rhs(t, &yp, &mut fp);
        for i in 0..m {
            out[(i, j)] = (fp[i] - f0[i]) / delta;
        }
        yp[j] = y[j];
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_catches_bad_input() {
        let p = OdeProblem::new("bad", vec![], (0.0, 1.0), |_, _, _| {});
        assert!(p.validate().is_err());
        let p = OdeProblem::new("bad", vec![1.0], (1.0, 0.0), |_, _, dy| dy[0] = 0.0);
        assert!(p.validate().is_err());
        let p = OdeProblem::new("bad", vec![1.0], (0.0, 1.0), |_, _, dy| dy[0] = f64::NAN);
        assert!(p.validate().is_err());
    }

    #[test]
    fn fd_jacobian_of_quadratic() {
        let p = OdeProblem::new("sq", vec![3.0, -2.0], (0.0, 1.0), |_, y, dy| {
            dy[0] = y[0] * y[1];
            dy[1] = y[0] * y[0];
        });
        let y = [3.0, -2.0];
        let mut f0 = [0.0; 2];
        p.rhs(0.0, &y, &mut f0);
        let mut j = DenseMatrix::zeros(2, 2);
        assert_eq!(
            finite_difference_jacobian(&p, 0.0, &y, &f0, 1e-8, &mut j),
            2
        );
        let want = [[-2.0, 3.0], [6.0, 0.0]];
        for i in 0..2 {
            for k in 0..2 {
                assert!((j[(i, k)] - want[i][k]).abs() < 1e-6);
            }
        }
    }
}
