use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use super::{emit, load_problem, resolve_choice, CliError, MethodArgs};
use crate::problems::{reference_solution, scd, OdeProblem, Reference, ReferenceCache};
use crate::solver::{integrate, IntegrationResult, SolverMethod, SolverOptions};

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Built-in problem name.
    #[arg(long)]
    pub problem: Option<String>,
    /// JSON problem description.
    #[arg(long)]
    pub problem_file: Option<PathBuf>,
    #[command(flatten)]
    pub method: MethodArgs,
    /// Relative tolerance (problem default when absent).
    #[arg(long)]
    pub rtol: Option<f64>,
    /// Absolute tolerance; by default the problem's value scaled by
    /// rtol / (problem rtol).
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long)]
    pub h0: Option<f64>,
    /// Constant stepsize without error control.
    #[arg(long)]
    pub fixed_h: Option<f64>,
    /// End of the integration interval.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Times for interpolated output (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub output_times: Vec<f64>,
    #[arg(long, default_value_t = 200_000)]
    pub max_steps: usize,
    /// Leave per-step samples out of the output.
    #[arg(long)]
    pub no_steps: bool,
    /// Self-reference cache file, read and updated.
    #[arg(long)]
    pub reference_cache: Option<PathBuf>,
    /// Result JSON (standard output when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Integration result with its accuracy against a reference.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    #[serde(flatten)]
    pub result: IntegrationResult,
    pub rtol: f64,
    pub atol: f64,
    pub scd: Option<f64>,
    pub reference: Option<Reference>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_error: Option<String>,
}

/// Tolerances for a run: defaults from the problem, with `atol` following
/// `rtol` proportionally.
pub fn tolerances(p: &OdeProblem, rtol: Option<f64>, atol: Option<f64>) -> (f64, f64) {
    let r = rtol.unwrap_or(p.rtol);
    let a = atol.unwrap_or(p.atol * r / p.rtol);
    (r, a)
}

pub fn solve(args: &SolveArgs) -> Result<SolveReport, CliError> {
    let mut problem = load_problem(args.problem.as_deref(), args.problem_file.as_deref())?;
    if let Some(t) = args.t_end {
        let t0 = problem.t0;
        problem = problem.with_span(t0, t);
    }
    problem.validate()?;
    let (k, r, ell) = args.method.triple()?;
    let method = SolverMethod::from_triple(k, r, ell, resolve_choice(r, ell, args.method.choice))?;
    let (rtol, atol) = tolerances(&problem, args.rtol, args.atol);
    let opts = SolverOptions {
        rtol,
        atol,
        h0: args.h0,
        fixed_h: args.fixed_h,
        output_times: args.output_times.clone(),
        max_steps: args.max_steps,
        record_steps: !args.no_steps,
        ..SolverOptions::default()
    };
    let result = integrate(&problem, &method, opts)?;
    let mut cache = match &args.reference_cache {
        Some(p) => Some(ReferenceCache::load(p)?),
        None => None,
    };
    let (scd_value, reference, reference_error) =
        match reference_solution(&problem, result.t_final, cache.as_mut()) {
            Ok(r) => (Some(scd(&result.y_final, &r.y, atol)), Some(r), None),
            Err(e) => (None, None, Some(e.to_string())),
        };
    if let (Some(p), Some(c)) = (&args.reference_cache, &cache) {
        c.save(p)?;
    }
    Ok(SolveReport {
        result,
        rtol,
        atol,
        scd: scd_value,
        reference,
        reference_error,
    })
}

pub fn run(args: &SolveArgs) -> Result<(), CliError> {
    let report = solve(args)?;
    emit(
        args.out.as_deref(),
        &(crate::json::to_string_sig17(&report) + "\n"),
    )?;
    let s = &report.result.stats;
    eprintln!(
        "{} {}: t = {}, steps {}, rejected {}, factorizations {}, scd {}",
        report.result.problem,
        report.result.method,
        report.result.t_final,
        s.steps,
        s.rejected,
        s.factorizations,
        report
            .scd
            .map_or_else(|| "n/a".to_string(), |v| format!("{v:.2}"))
    );
    match &report.result.failure {
        Some(f) => Err(CliError::solver(f.clone())),
        None => Ok(()),
    }
}
