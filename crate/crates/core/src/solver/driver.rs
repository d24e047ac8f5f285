use serde::Serialize;

use crate::linalg::DenseMatrix;
use crate::problems::{finite_difference_jacobian, OdeProblem};

use super::iteration::{
    blended_nonlinear_solve, estimate_error, IterationControl, IterationMatrix, Weights,
};
use super::{History, SolverError, SolverMethod};

const MAX_START_ATTEMPTS: usize = 10;
/// Sweep budget of a fixed-step start, which iterates from a constant
/// predictor and cannot fall back to a smaller step.
const FIXED_START_MIN_SWEEPS: usize = 60;
const SAFETY: f64 = 0.9;
const MIN_RATIO: f64 = 0.2;
const MAX_RATIO: f64 = 5.0;
/// Accepted-step ratios within this band keep `h` (and the factorization).
const HYSTERESIS: f64 = 0.1;
/// Contraction per sweep above which the Jacobian is refreshed.
const SLOW_CONTRACTION: f64 = 0.5;
const UNDERFLOW: f64 = 1e-14;

/// Stepsize factor `min(5, max(0.2, 0.9·err^{−1/(k+1)}))` for an error
/// norm `err` of an order-`k` method.
pub fn step_ratio(err: f64, k: usize) -> f64 {
    if err <= 0.0 {
        return MAX_RATIO;
    }
    (SAFETY * err.powf(-1.0 / (k + 1) as f64)).clamp(MIN_RATIO, MAX_RATIO)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h0: Option<f64>,
    /// Constant stepsize; disables error control.
    pub fixed_h: Option<f64>,
    /// Times at which to report interpolated solution values.
    pub output_times: Vec<f64>,
    pub max_steps: usize,
    pub iteration: IterationControl,
    /// Keep the solution at every accepted step.
    pub record_steps: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-6,
            atol: 1e-6,
            h0: None,
            fixed_h: None,
            output_times: Vec::new(),
            max_steps: 200_000,
            iteration: IterationControl::default(),
            record_steps: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Statistics {
    pub steps: usize,
    pub rejected: usize,
    pub iteration_failures: usize,
    pub start_attempts: usize,
    pub f_evals: usize,
    pub jac_evals: usize,
    pub factorizations: usize,
    pub sweeps: usize,
    pub row_solves: usize,
    /// `2/3·m³` per factorization plus `2m²` per pair of triangular solves.
    pub cost: f64,
}

impl Statistics {
    fn finish(&mut self, m: usize) {
        let m = m as f64;
        self.cost = self.factorizations as f64 * 2.0 / 3.0 * m.powi(3)
            + self.row_solves as f64 * 2.0 * m * m;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepOutcome {
    pub accepted: bool,
    pub error_norm: f64,
    pub h: f64,
    pub new_h: f64,
    pub iterations: usize,
    pub factorizations_used: usize,
}

/// Integration state for one problem and one method.
pub struct Engine<'a> {
    problem: &'a OdeProblem,
    method: &'a SolverMethod,
    opts: SolverOptions,
    t: f64,
    h: f64,
    y_old: DenseMatrix,
    y_old_h: f64,
    history: History,
    jac: DenseMatrix,
    jac_t: Option<f64>,
    jac_stale: bool,
    jac_version: u64,
    factor: Option<IterationMatrix>,
    stats: Statistics,
    steps: Vec<Sample>,
    dense: Vec<Sample>,
    next_output: usize,
}

impl<'a> Engine<'a> {
    pub fn new(
        problem: &'a OdeProblem,
        method: &'a SolverMethod,
        opts: SolverOptions,
    ) -> Result<Self, SolverError> {
        problem.validate()?;
        if !(opts.rtol > 0.0 && opts.atol > 0.0) {
            return Err(SolverError::InvalidOptions(
                "tolerances must be positive".into(),
            ));
        }
        for h in [opts.h0, opts.fixed_h].into_iter().flatten() {
            if !(h.is_finite() && h > 0.0) {
                return Err(SolverError::InvalidOptions(format!(
                    "stepsize {h} must be positive"
                )));
            }
        }
        if opts
            .output_times
            .iter()
            .any(|&t| !(t >= problem.t0 && t <= problem.t_end))
        {
            return Err(SolverError::InvalidOptions(
                "output times must lie inside the integration interval".into(),
            ));
        }
        let mut opts = opts;
        opts.output_times.sort_by(f64::total_cmp);
        let m = problem.dim();
        let r = method.r();
        Ok(Self {
            problem,
            method,
            opts,
            t: problem.t0,
            h: 0.0,
            y_old: DenseMatrix::zeros(r, m),
            y_old_h: 0.0,
            history: History::new(method.k()),
            jac: DenseMatrix::zeros(m, m),
            jac_t: None,
            jac_stale: true,
            jac_version: 0,
            factor: None,
            stats: Statistics::default(),
            steps: Vec::new(),
            dense: Vec::new(),
            next_output: 0,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn stats(&self) -> &Statistics {
        &self.stats
    }
    pub fn history(&self) -> &History {
        &self.history
    }
    pub fn y_old(&self) -> &DenseMatrix {
        &self.y_old
    }
    pub fn current(&self) -> &[f64] {
        &self.history.last().expect("started").1
    }

    fn span(&self) -> f64 {
        self.problem.t_end - self.problem.t0
    }

    fn weights(&self, y: &[f64]) -> Weights {
        Weights::new(self.opts.rtol, self.opts.atol, y)
    }

    fn refresh_jacobian(&mut self, t: f64, y: &[f64]) {
        if self.jac_t == Some(t) && !self.jac_stale {
            return;
        }
        if !self.problem.jacobian(t, y, &mut self.jac) {
            let mut f0 = vec![0.0; y.len()];
            self.problem.rhs(t, y, &mut f0);
            self.stats.f_evals += 1 + finite_difference_jacobian(
                self.problem,
                t,
                y,
                &f0,
                self.opts.atol,
                &mut self.jac,
            );
        }
        self.stats.jac_evals += 1;
        self.jac_t = Some(t);
        self.jac_stale = false;
        self.jac_version += 1;
    }

    /// Factorization of `I − hγJ` for the current `h`, `γ` and Jacobian;
    /// returns whether a new one was computed.
    fn ensure_factor(&mut self, h: f64, gamma: f64) -> Result<bool, SolverError> {
        if let Some(f) = &self.factor {
            if f.h == h && f.gamma == gamma && f.jac_version == self.jac_version {
                return Ok(false);
            }
        }
        self.factor = Some(IterationMatrix::new(&self.jac, h, gamma, self.jac_version)?);
        self.stats.factorizations += 1;
        Ok(true)
    }

    fn initial_step(&self) -> f64 {
        if let Some(h) = self.opts.fixed_h.or(self.opts.h0).or(self.problem.h0) {
            return h;
        }
        let p = self.problem;
        let m = p.dim();
        let w = self.weights(&p.y0);
        let mut f0 = vec![0.0; m];
        p.rhs(p.t0, &p.y0, &mut f0);
        let d0 = w.vec_norm(&p.y0);
        let d1 = w.vec_norm(&f0);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let y1: Vec<f64> = p.y0.iter().zip(&f0).map(|(y, f)| y + h0 * f).collect();
        let mut f1 = vec![0.0; m];
        p.rhs(p.t0 + h0, &y1, &mut f1);
        let diff: Vec<f64> = f1.iter().zip(&f0).map(|(a, b)| a - b).collect();
        let d2 = w.vec_norm(&diff) / h0;
        let dmax = d1.max(d2);
        let h1 = if dmax <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / dmax).powf(1.0 / (self.method.k() + 1) as f64)
        };
        (100.0 * h0)
            .min(h1)
            .min(self.span() / (self.method.k() + self.method.ell()) as f64)
    }

    /// Generates `y_1..y_k` on a uniform grid with the starting block and
    /// seeds the history. Halves `h` on iteration failure, up to 10 times.
    pub fn start(&mut self) -> Result<(), SolverError> {
        let p = self.problem;
        let m = p.dim();
        let k = self.method.k();
        let sys = &self.method.start_system;
        let mut h = self.initial_step();
        self.refresh_jacobian(p.t0, &p.y0);
        let mut eta = DenseMatrix::zeros(k, m);
        for i in 0..k {
            for j in 0..m {
                eta[(i, j)] = p.y0[j];
            }
        }
        let weights = self.weights(&p.y0);
        let mut ctl = self.opts.iteration;
        if self.opts.fixed_h.is_some() {
            ctl.max_sweeps = ctl.max_sweeps.max(FIXED_START_MIN_SWEEPS);
        }
        let mut last_err = None;
        for _ in 0..=MAX_START_ATTEMPTS {
            self.stats.start_attempts += 1;
            if let Err(e) = self.ensure_factor(h, sys.gamma) {
                last_err = Some(e);
                if self.opts.fixed_h.is_some() {
                    break;
                }
                h *= 0.5;
                continue;
            }
            let n = self.factor.as_ref().expect("factor ensured");
            let outcome =
                blended_nonlinear_solve(p, sys, p.t0, h, &eta, eta.clone(), n, &weights, &ctl);
            match outcome {
                Ok(out) => {
                    self.stats.sweeps += out.sweeps;
                    self.stats.f_evals += out.f_evals;
                    self.stats.row_solves += out.row_solves;
                    self.history.clear();
                    self.history.push(p.t0, p.y0.clone());
                    for i in 0..k {
                        self.history
                            .push(p.t0 + (i + 1) as f64 * h, out.block.row(i).to_vec());
                    }
                    self.t = p.t0 + k as f64 * h;
                    self.h = h;
                    self.rebuild_y_old();
                    self.emit_outputs(p.t0);
                    if self.opts.record_steps {
                        self.steps.push(Sample {
                            t: p.t0,
                            y: p.y0.clone(),
                        });
                        self.steps.push(Sample {
                            t: self.t,
                            y: self.current().to_vec(),
                        });
                    }
                    return Ok(());
                }
                Err(e) => {
                    self.stats.iteration_failures += 1;
                    if let SolverError::IterationFailure { sweeps, .. } = e {
                        self.stats.sweeps += sweeps;
                    }
                    last_err = Some(e);
                    if self.opts.fixed_h.is_some() {
                        break;
                    }
                    h *= 0.5;
                }
            }
        }
        Err(SolverError::StartFailure(
            last_err.map(|e| e.to_string()).unwrap_or_default(),
        ))
    }

    /// Re-evaluates the previous-block values at spacing `h` from the history
    /// polynomial.
    fn rebuild_y_old(&mut self) {
        let tab = &self.method.tableau;
        let ell = tab.ell() as f64;
        for (i, ci) in tab.c().iter().enumerate() {
            let v = self.history.interpolate(self.t + (ci - ell) * self.h);
            for (j, x) in v.into_iter().enumerate() {
                self.y_old[(i, j)] = x;
            }
        }
        self.y_old_h = self.h;
    }

    fn emit_outputs(&mut self, upto: f64) {
        while self.next_output < self.opts.output_times.len()
            && self.opts.output_times[self.next_output] <= upto
        {
            let t = self.opts.output_times[self.next_output];
            let y = if t == self.problem.t0 {
                self.problem.y0.clone()
            } else {
                self.history.interpolate(t)
            };
            self.dense.push(Sample { t, y });
            self.next_output += 1;
        }
    }

    /// Largest `h` for which the rebuilt previous block stays inside the
    /// span of the interpolation window.
    fn growth_cap(&self) -> f64 {
        let ell = self.method.ell();
        if ell <= 1 {
            return f64::INFINITY;
        }
        self.history.recent_span() / (ell - 1) as f64
    }

    /// Attempts one step of size `h` from the current time.
    pub fn advance(&mut self) -> Result<StepOutcome, SolverError> {
        let p = self.problem;
        let method = self.method;
        let ell = method.ell() as f64;
        let k = method.k();
        let remaining = p.t_end - self.t;
        let last = self.t + ell * self.h * 1.05 >= p.t_end;
        if last {
            let h_last = remaining / ell;
            // a roundoff-sized change would only cost a refactorization
            if (h_last - self.h).abs() > 1e-9 * self.h {
                self.h = h_last;
            }
        }
        let h = self.h;
        if self.y_old_h != h {
            self.rebuild_y_old();
        }
        let y_n = self.current().to_vec();
        if self.jac_stale {
            self.refresh_jacobian(self.t, &y_n);
        }
        let sys = &method.main;
        let fresh = self.ensure_factor(h, sys.gamma);
        let fresh = match fresh {
            Ok(f) => f,
            Err(_) => return self.reject_failure(h, 0, 0),
        };
        let mut predictor = DenseMatrix::zeros(method.r(), p.dim());
        for (i, ci) in sys.c.iter().enumerate() {
            let v = self.history.extrapolate(self.t + ci * h);
            for (j, x) in v.into_iter().enumerate() {
                predictor[(i, j)] = x;
            }
        }
        let eta = method.tableau.u().matmul(&self.y_old)?;
        let weights = self.weights(&y_n);
        let n = self.factor.as_ref().expect("factor ensured");
        let solved = blended_nonlinear_solve(
            p,
            sys,
            self.t,
            h,
            &eta,
            predictor,
            n,
            &weights,
            &self.opts.iteration,
        );
        let out = match solved {
            Ok(out) => out,
            Err(SolverError::IterationFailure { sweeps, .. }) => {
                return self.reject_failure(h, sweeps, usize::from(fresh));
            }
            Err(e) => return Err(e),
        };
        self.stats.sweeps += out.sweeps;
        self.stats.f_evals += out.f_evals;
        self.stats.row_solves += out.row_solves;

        let block_last = out.block.row(method.r() - 1).to_vec();
        let err_weights = Weights::from_pair(self.opts.rtol, self.opts.atol, &y_n, &block_last);
        let est = estimate_error(
            p,
            sys,
            &method.estimator,
            self.t,
            h,
            &self.y_old,
            &out.block,
            n,
            &err_weights,
        )?;
        self.stats.f_evals += est.f_evals;
        self.stats.row_solves += est.row_solves;
        let err = est.norm;
        let fixed = self.opts.fixed_h.is_some();
        let accepted = fixed || err <= 1.0;
        let ratio = step_ratio(err, k);
        if !accepted {
            self.stats.rejected += 1;
            self.jac_stale = true;
            let new_h = h * ratio.clamp(MIN_RATIO, SAFETY);
            self.set_h(new_h)?;
            return Ok(StepOutcome {
                accepted: false,
                error_norm: err,
                h,
                new_h,
                iterations: out.sweeps,
                factorizations_used: 1,
            });
        }

        let t_prev = self.t;
        for (i, ci) in sys.c.iter().enumerate() {
            self.history
                .push(t_prev + ci * h, out.block.row(i).to_vec());
        }
        self.t = if last { p.t_end } else { t_prev + ell * h };
        self.y_old = out.block;
        self.y_old_h = h;
        self.stats.steps += 1;
        self.emit_outputs(self.t);
        if self.opts.record_steps {
            self.steps.push(Sample {
                t: self.t,
                y: self.current().to_vec(),
            });
        }
        if out.contraction > SLOW_CONTRACTION || 2 * out.sweeps > self.opts.iteration.max_sweeps {
            self.jac_stale = true;
        }
        let new_h = if fixed {
            h
        } else {
            let mut cand = h * ratio;
            cand = cand.min(self.growth_cap());
            if (cand / h - 1.0).abs() <= HYSTERESIS {
                h
            } else {
                cand
            }
        };
        self.h = new_h;
        Ok(StepOutcome {
            accepted: true,
            error_norm: err,
            h,
            new_h,
            iterations: out.sweeps,
            factorizations_used: 1,
        })
    }

    fn set_h(&mut self, new_h: f64) -> Result<(), SolverError> {
        if new_h < UNDERFLOW * self.span() {
            return Err(SolverError::StepsizeUnderflow {
                t: self.t,
                h: new_h,
            });
        }
        self.h = new_h;
        Ok(())
    }

    fn reject_failure(
        &mut self,
        h: f64,
        sweeps: usize,
        factorizations: usize,
    ) -> Result<StepOutcome, SolverError> {
        self.stats.iteration_failures += 1;
        self.stats.sweeps += sweeps;
        let jacobian_current = self.jac_t == Some(self.t) && !self.jac_stale;
        if !jacobian_current {
            // retry the same step with a fresh Jacobian before shrinking h
            self.jac_stale = true;
            return Ok(StepOutcome {
                accepted: false,
                error_norm: f64::INFINITY,
                h,
                new_h: h,
                iterations: sweeps,
                factorizations_used: factorizations,
            });
        }
        if self.opts.fixed_h.is_some() {
            return Err(SolverError::IterationFailure {
                sweeps,
                ratio: f64::NAN,
            });
        }
        self.stats.rejected += 1;
        self.jac_stale = true;
        self.set_h(0.5 * h)?;
        Ok(StepOutcome {
            accepted: false,
            error_norm: f64::INFINITY,
            h,
            new_h: 0.5 * h,
            iterations: sweeps,
            factorizations_used: factorizations,
        })
    }

    pub fn finished(&self) -> bool {
        self.t >= self.problem.t_end
    }

    /// Runs from the start to `t_end`. Failures after the start are reported
    /// in the result rather than as an error.
    pub fn run(mut self) -> IntegrationResult {
        let mut failure = self.start().err();
        while failure.is_none() && !self.finished() {
            if self.stats.steps + self.stats.rejected >= self.opts.max_steps {
                failure = Some(SolverError::TooManySteps(self.opts.max_steps));
                break;
            }
            if let Err(e) = self.advance() {
                failure = Some(e);
            }
        }
        self.stats.finish(self.problem.dim());
        let (t_final, y_final) = match self.history.last() {
            Some((t, y)) => (*t, y.clone()),
            None => (self.problem.t0, self.problem.y0.clone()),
        };
        IntegrationResult {
            problem: self.problem.name.clone(),
            method: self.method.tableau.id().to_string(),
            k: self.method.k(),
            gamma: self.method.params.gamma,
            success: failure.is_none(),
            failure: failure.map(|e| e.to_string()),
            t_final,
            y_final,
            steps: self.steps,
            dense: self.dense,
            stats: self.stats,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrationResult {
    pub problem: String,
    pub method: String,
    pub k: usize,
    pub gamma: f64,
    pub success: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub t_final: f64,
    pub y_final: Vec<f64>,
    pub steps: Vec<Sample>,
    pub dense: Vec<Sample>,
    pub stats: Statistics,
}

/// Integrates `problem` over its interval. Configuration errors are returned
/// as `Err`; failures during the integration give a result with
/// `success = false` and the solution reached so far.
pub fn integrate(
    problem: &OdeProblem,
    method: &SolverMethod,
    opts: SolverOptions,
) -> Result<IntegrationResult, SolverError> {
    Ok(Engine::new(problem, method, opts)?.run())
}
