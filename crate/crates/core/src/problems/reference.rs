use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{OdeProblem, ProblemError};
use crate::construction::AuxChoice;
use crate::solver::{integrate, SolverMethod, SolverOptions};

/// Relative tolerance of self-reference runs.
pub const SELF_REFERENCE_RTOL: f64 = 1e-12;
/// Orders of the primary and the confirming self-reference runs.
pub const SELF_REFERENCE_ORDERS: (usize, usize) = (8, 6);
/// Largest guarded relative disagreement accepted between the two runs.
pub const SELF_REFERENCE_AGREEMENT: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    SelfReference {
        k: usize,
        confirmed_by: usize,
        rtol: f64,
        atol: f64,
        /// Guarded relative difference between the two runs.
        disagreement: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub y: Vec<f64>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceEntry {
    pub problem: String,
    pub t: f64,
    pub y: Vec<f64>,
    pub provenance: Provenance,
}

/// Self-reference values keyed by problem name and time.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCache {
    pub entries: Vec<ReferenceEntry>,
}

impl ReferenceCache {
    /// Reads a cache file; a missing file gives an empty cache.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ProblemError> {
        let path = path.as_ref();
        if !path.exists() {
            return Ok(Self::default());
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| ProblemError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| ProblemError::Parse(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ProblemError> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("cache serializes");
        std::fs::write(path, text + "\n")
            .map_err(|e| ProblemError::Io(format!("{}: {e}", path.display())))
    }

    pub fn get(&self, problem: &str, t: f64) -> Option<Reference> {
        self.entries
            .iter()
            .find(|e| e.problem == problem && e.t == t)
            .map(|e| Reference {
                y: e.y.clone(),
                provenance: e.provenance.clone(),
            })
    }

    /// Inserts or replaces the entry for `(problem, t)`.
    pub fn insert(&mut self, problem: &str, t: f64, reference: &Reference) {
        self.entries.retain(|e| !(e.problem == problem && e.t == t));
        self.entries.push(ReferenceEntry {
            problem: problem.to_string(),
            t,
            y: reference.y.clone(),
            provenance: reference.provenance.clone(),
        });
        self.entries
            .sort_by(|a, b| a.problem.cmp(&b.problem).then(a.t.total_cmp(&b.t)));
    }
}

/// Significant correct digits: `−log₁₀ max_j |y_j − ref_j| / max(|ref_j|, atol)`.
/// Exact agreement is reported as the digits of machine precision.
pub fn scd(y: &[f64], reference: &[f64], atol: f64) -> f64 {
    let err = guarded_error(y, reference, atol);
    if err.is_nan() {
        return f64::NAN;
    }
    -err.max(f64::EPSILON).log10()
}

fn guarded_error(y: &[f64], reference: &[f64], atol: f64) -> f64 {
    if y.len() != reference.len() {
        return f64::NAN;
    }
    y.iter()
        .zip(reference)
        .map(|(a, b)| (a - b).abs() / b.abs().max(atol))
        .fold(0.0, |m, e| {
            if e.is_nan() || m.is_nan() {
                f64::NAN
            } else {
                m.max(e)
            }
        })
}

/// Reference value of `problem` at `t`: the analytic solution when known,
/// otherwise a cached or freshly computed self-reference. Fresh
/// self-references are stored in `cache` once two orders agree.
pub fn reference_solution(
    problem: &OdeProblem,
    t: f64,
    cache: Option<&mut ReferenceCache>,
) -> Result<Reference, ProblemError> {
    let no_ref = |reason: String| ProblemError::NoReference {
        problem: problem.name.clone(),
        t,
        reason,
    };
    if let Some(y) = problem.exact(t) {
        return Ok(Reference {
            y,
            provenance: Provenance::Analytic,
        });
    }
    if let Some(hit) = cache.as_ref().and_then(|c| c.get(&problem.name, t)) {
        return Ok(hit);
    }
    if !(t > problem.t0 && t.is_finite()) {
        return Err(no_ref("time must lie after the initial time".into()));
    }
    let rtol = SELF_REFERENCE_RTOL;
    let atol = problem.atol * rtol / problem.rtol;
    let target = problem.clone().with_span(problem.t0, t);
    let run = |k: usize| -> Result<Vec<f64>, ProblemError> {
        let method =
            SolverMethod::new(k, AuxChoice::Rational).map_err(|e| no_ref(e.to_string()))?;
        let opts = SolverOptions {
            rtol,
            atol,
            max_steps: 2_000_000,
            record_steps: false,
            ..SolverOptions::default()
        };
        let res = integrate(&target, &method, opts).map_err(|e| no_ref(e.to_string()))?;
        match res.failure {
            None => Ok(res.y_final),
            Some(f) => Err(no_ref(format!("order {k} self-reference run failed: {f}"))),
        }
    };
    let (k1, k2) = SELF_REFERENCE_ORDERS;
    let primary = run(k1)?;
    let check = run(k2)?;
    let disagreement = guarded_error(&check, &primary, atol);
    if !(disagreement <= SELF_REFERENCE_AGREEMENT) {
        return Err(no_ref(format!(
            "orders {k1} and {k2} disagree by {disagreement:.2e}"
        )));
    }
    let reference = Reference {
        y: primary,
        provenance: Provenance::SelfReference {
            k: k1,
            confirmed_by: k2,
            rtol,
            atol,
            disagreement,
        },
    };
    if let Some(c) = cache {
        c.insert(&problem.name, t, &reference);
    }
    Ok(reference)
}
