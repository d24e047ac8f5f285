use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use super::solve::tolerances;
use super::{create, emit, load_problem, parse_list, resolve_choice, CliError};
use crate::construction::{catalogue_triple, AuxChoice};
use crate::problems::{reference_solution, scd, OdeProblem, ReferenceCache};
use crate::solver::{integrate, SolverMethod, SolverOptions};

pub const DEFAULT_TOLERANCES: &str = "1e-4,1e-5,1e-6,1e-7,1e-8,1e-9,1e-10";

#[derive(Debug, Clone, Args)]
pub struct WpArgs {
    /// Built-in problem names (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub problem: Vec<String>,
    /// JSON problem descriptions.
    #[arg(long)]
    pub problem_file: Vec<PathBuf>,
    /// Orders to run (comma separated).
    #[arg(long, default_value = "4,6,8")]
    pub k_list: String,
    /// Relative tolerances (comma separated); each run uses the problem's
    /// atol scaled by the same factor.
    #[arg(long, default_value = DEFAULT_TOLERANCES)]
    pub tol_list: String,
    /// Auxiliary-point placement: 1 or 2.
    #[arg(long)]
    pub choice: Option<AuxChoice>,
    /// Self-reference cache file, read and updated.
    #[arg(long)]
    pub reference_cache: Option<PathBuf>,
    /// Record CSV (standard output when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Monotonicity report as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkPrecisionRecord {
    pub problem: String,
    pub k: usize,
    pub r: usize,
    pub ell: usize,
    pub choice: u8,
    pub rtol: f64,
    pub atol: f64,
    /// NaN for failed runs.
    pub scd: f64,
    pub cost: f64,
    pub wall_time: f64,
    pub steps: usize,
    pub rejected: usize,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesMonotonicity {
    pub problem: String,
    pub k: usize,
    pub pairs: usize,
    pub increased: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub pairs: usize,
    pub increased: usize,
    /// Share of consecutive tolerance steps (loose to tight) where scd grew.
    pub fraction: f64,
    pub series: Vec<SeriesMonotonicity>,
}

/// Groups records by problem and order; within a group the tolerances are
/// taken from loosest to tightest.
pub fn monotonicity(records: &[WorkPrecisionRecord]) -> MonotonicityReport {
    let mut keys: Vec<(String, usize)> = Vec::new();
    for r in records {
        let key = (r.problem.clone(), r.k);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let series: Vec<SeriesMonotonicity> = keys
        .into_iter()
        .map(|(problem, k)| {
            let mut rs: Vec<&WorkPrecisionRecord> = records
                .iter()
                .filter(|r| r.problem == problem && r.k == k)
                .collect();
            rs.sort_by(|a, b| b.rtol.total_cmp(&a.rtol));
            let increased = rs.windows(2).filter(|w| w[1].scd > w[0].scd).count();
            SeriesMonotonicity {
                problem,
                k,
                pairs: rs.len().saturating_sub(1),
                increased,
            }
        })
        .collect();
    let pairs = series.iter().map(|s| s.pairs).sum();
    let increased = series.iter().map(|s| s.increased).sum();
    MonotonicityReport {
        pairs,
        increased,
        fraction: if pairs == 0 {
            f64::NAN
        } else {
            increased as f64 / pairs as f64
        },
        series,
    }
}

/// Runs every `(method, tolerance)` pair on `problem` in parallel; the
/// records come back in input order.
pub fn sweep(
    problem: &OdeProblem,
    methods: &[SolverMethod],
    rtols: &[f64],
    reference: &[f64],
) -> Vec<WorkPrecisionRecord> {
    let jobs: Vec<(&SolverMethod, f64)> = methods
        .iter()
        .flat_map(|m| rtols.iter().map(move |&r| (m, r)))
        .collect();
    jobs.par_iter()
        .map(|&(method, rtol)| {
            let (rtol, atol) = tolerances(problem, Some(rtol), None);
            let opts = SolverOptions {
                rtol,
                atol,
                record_steps: false,
                ..SolverOptions::default()
            };
            let clock = Instant::now();
            let res = integrate(problem, method, opts);
            let wall_time = clock.elapsed().as_secs_f64();
            let id = method.tableau.id();
            let mut rec = WorkPrecisionRecord {
                problem: problem.name.clone(),
                k: id.k,
                r: id.r,
                ell: id.ell,
                choice: id.choice.code(),
                rtol,
                atol,
                scd: f64::NAN,
                cost: f64::NAN,
                wall_time,
                steps: 0,
                rejected: 0,
                success: false,
            };
            if let Ok(res) = res {
                rec.cost = res.stats.cost;
                rec.steps = res.stats.steps;
                rec.rejected = res.stats.rejected;
                rec.success = res.success;
                if res.success {
                    rec.scd = scd(&res.y_final, reference, atol);
                }
            }
            rec
        })
        .collect()
}

fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:.6e}")
    }
}

pub fn write_csv<W: std::io::Write>(
    records: &[WorkPrecisionRecord],
    out: W,
) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::internal(format!("csv output failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "problem",
        "k",
        "r",
        "ell",
        "choice",
        "rtol",
        "atol",
        "scd",
        "cost",
        "wall_time",
        "steps",
        "rejected",
        "success",
    ])
    .map_err(io)?;
    for r in records {
        w.write_record([
            r.problem.clone(),
            r.k.to_string(),
            r.r.to_string(),
            r.ell.to_string(),
            r.choice.to_string(),
            format!("{:e}", r.rtol),
            format!("{:e}", r.atol),
            if r.scd.is_nan() {
                "NaN".into()
            } else {
                format!("{:.4}", r.scd)
            },
            fmt_num(r.cost),
            format!("{:.6e}", r.wall_time),
            r.steps.to_string(),
            r.rejected.to_string(),
            r.success.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| CliError::internal(format!("csv output failed: {e}")))
}

pub fn run(args: &WpArgs) -> Result<(), CliError> {
    let ks: Vec<usize> = parse_list(&args.k_list, "k list")?;
    let rtols: Vec<f64> = parse_list(&args.tol_list, "tolerance list")?;
    if let Some(bad) = rtols.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(CliError::config(format!("tolerance {bad} is not positive")));
    }
    let mut problems = Vec::new();
    for name in &args.problem {
        problems.push(load_problem(Some(name), None)?);
    }
    for path in &args.problem_file {
        problems.push(load_problem(None, Some(path))?);
    }
    if problems.is_empty() {
        return Err(CliError::config("no problem given"));
    }
    let methods = ks
        .iter()
        .map(|&k| {
            let (k, r, ell) = catalogue_triple(k)
                .ok_or_else(|| CliError::config(format!("order {k} is not in the catalogue")))?;
            Ok(SolverMethod::from_triple(
                k,
                r,
                ell,
                resolve_choice(r, ell, args.choice),
            )?)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut cache = match &args.reference_cache {
        Some(p) => Some(ReferenceCache::load(p)?),
        None => None,
    };
    let mut records = Vec::new();
    for p in &problems {
        p.validate()?;
        let reference = reference_solution(p, p.t_end, cache.as_mut())?;
        records.extend(sweep(p, &methods, &rtols, &reference.y));
    }
    if let (Some(p), Some(c)) = (&args.reference_cache, &cache) {
        c.save(p)?;
    }
    match &args.out {
        Some(p) => write_csv(&records, create(p)?)?,
        None => write_csv(&records, std::io::stdout().lock())?,
    }
    let report = monotonicity(&records);
    eprintln!(
        "scd increased in {}/{} consecutive tolerance steps ({:.1}%)",
        report.increased,
        report.pairs,
        100.0 * report.fraction
    );
    let failed = records.iter().filter(|r| !r.success).count();
    if failed > 0 {
        eprintln!("{failed} run(s) failed");
    }
    if let Some(p) = &args.report {
        emit(Some(p), &(crate::json::to_string_sig17(&report) + "\n"))?;
    }
    Ok(())
}
