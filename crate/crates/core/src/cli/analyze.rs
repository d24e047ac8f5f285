use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use super::{create, emit, resolve_choice, CliError, ExitStatus};
use crate::analysis::{check_stability, StabilityReport};
use crate::blended::{optimize_gamma, BlendedParams};
use crate::construction::{
    assemble_glm, catalogue_triple, reference_params, AuxChoice, MethodId, CATALOGUE_TRIPLES,
};

/// Largest deviation from the reference tables accepted by `--check`.
pub const CHECK_TOLERANCE: f64 = 5e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChoiceSelection {
    #[value(name = "1")]
    Geometric,
    #[value(name = "2")]
    Rational,
    Both,
}

impl ChoiceSelection {
    fn choices(self) -> Vec<AuxChoice> {
        match self {
            ChoiceSelection::Geometric => vec![AuxChoice::Geometric],
            ChoiceSelection::Rational => vec![AuxChoice::Rational],
            ChoiceSelection::Both => vec![AuxChoice::Geometric, AuxChoice::Rational],
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Analyze every catalogue method.
    #[arg(long)]
    pub catalogue: bool,
    /// Orders to analyze (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<usize>,
    /// Blocksize, with --ell, for a single non-catalogue order.
    #[arg(long, requires = "ell")]
    pub r: Option<usize>,
    #[arg(long, requires = "r")]
    pub ell: Option<usize>,
    /// Auxiliary-point placement: 1, 2 or both (default both with
    /// --catalogue, 2 otherwise).
    #[arg(long, value_enum)]
    pub choice: Option<ChoiceSelection>,
    /// Compare against the embedded reference tables.
    #[arg(long)]
    pub check: bool,
    /// CSV output (standard output when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Stability reports as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodAnalysis {
    pub method: MethodId,
    pub params: BlendedParams,
    pub stability: StabilityReport,
    /// Reference-table deviations above the tolerance, as `(field, computed,
    /// reference)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mismatches: Option<Vec<(String, f64, f64)>>,
}

impl MethodAnalysis {
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.stability.l_stable {
            out.push(format!(
                "{} is not L-stable (max |R(ix)| = {:.3e}, |R(-1e8)| = {:.3e})",
                self.method, self.stability.max_imag_axis_radius, self.stability.radius_at_large_q
            ));
        }
        if !self.params.is_a_convergent() {
            out.push(format!(
                "{} iteration is not L-convergent (rho* = {:.4})",
                self.method, self.params.rho_star
            ));
        }
        for (field, got, want) in self.mismatches.iter().flatten() {
            out.push(format!(
                "{} {field} = {got:.6} differs from the table value {want:.4}",
                self.method
            ));
        }
        out
    }
}

fn selection(args: &AnalyzeArgs) -> Result<Vec<MethodId>, CliError> {
    if !args.catalogue && args.k.is_empty() {
        return Err(CliError::config("empty selection: give --catalogue or --k"));
    }
    if args.r.is_some() && (args.catalogue || args.k.len() != 1) {
        return Err(CliError::config("--r/--ell need exactly one --k"));
    }
    let default = if args.catalogue {
        ChoiceSelection::Both
    } else {
        ChoiceSelection::Rational
    };
    let choices = args.choice.unwrap_or(default).choices();
    let triples: Vec<(usize, usize, usize)> = if args.catalogue {
        CATALOGUE_TRIPLES.to_vec()
    } else if let (Some(r), Some(ell)) = (args.r, args.ell) {
        vec![(args.k[0], r, ell)]
    } else {
        args.k
            .iter()
            .map(|&k| {
                catalogue_triple(k)
                    .ok_or_else(|| CliError::config(format!("order {k} is not in the catalogue")))
            })
            .collect::<Result<_, _>>()?
    };
    let mut ids = Vec::new();
    for &(k, r, ell) in &triples {
        for &c in &choices {
            let id = MethodId::new(k, r, ell, resolve_choice(r, ell, Some(c)));
            if !ids.contains(&id) {
                ids.push(id);
            }
        }
    }
    Ok(ids)
}

fn compare(id: &MethodId, p: &BlendedParams) -> Vec<(String, f64, f64)> {
    let table_choice = match id.choice {
        AuxChoice::None => AuxChoice::Rational,
        c => c,
    };
    let Some(rp) = reference_params(id.k, table_choice).filter(|rp| rp.r == id.r) else {
        return Vec::new();
    };
    [
        ("gamma", p.gamma, rp.gamma),
        ("rho_tilde", p.rho_tilde, rp.rho_tilde),
        ("rho_inf", p.rho_inf, rp.rho_inf),
        ("rho_star", p.rho_star, rp.rho_star),
    ]
    .into_iter()
    .filter(|(_, got, want)| !((got - want).abs() <= CHECK_TOLERANCE))
    .map(|(f, got, want)| (f.to_string(), got, want))
    .collect()
}

/// Parameters and stability report of one method.
pub fn analyze_method(id: MethodId, check: bool) -> Result<MethodAnalysis, CliError> {
    let t = assemble_glm(id.k, id.r, id.ell, id.choice)?;
    let params = optimize_gamma(t.a())?.params;
    let t = t.with_gamma(params.gamma);
    let stability = check_stability(&t);
    let mismatches = check.then(|| compare(&id, &params));
    Ok(MethodAnalysis {
        method: id,
        params,
        stability,
        mismatches,
    })
}

pub fn write_csv<W: std::io::Write>(rows: &[MethodAnalysis], out: W) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::internal(format!("csv output failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "k",
        "r",
        "r_minus_ell",
        "choice",
        "gamma",
        "rho_tilde",
        "rho_inf",
        "rho_star",
        "gamma_star",
        "l_stable",
        "l_convergent",
    ])
    .map_err(io)?;
    for a in rows {
        let p = &a.params;
        w.write_record([
            a.method.k.to_string(),
            a.method.r.to_string(),
            a.method.aux_count().to_string(),
            a.method.choice.code().to_string(),
            format!("{:.8}", p.gamma),
            format!("{:.8}", p.rho_tilde),
            format!("{:.8}", p.rho_inf),
            format!("{:.8}", p.rho_star),
            format!("{:.8}", p.gamma_star),
            a.stability.l_stable.to_string(),
            p.is_a_convergent().to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| CliError::internal(format!("csv output failed: {e}")))
}

pub fn run(args: &AnalyzeArgs) -> Result<(), CliError> {
    let ids = selection(args)?;
    let rows = ids
        .par_iter()
        .map(|&id| analyze_method(id, args.check))
        .collect::<Result<Vec<_>, _>>()?;
    match &args.out {
        Some(p) => write_csv(&rows, create(p)?)?,
        None => write_csv(&rows, std::io::stdout().lock())?,
    }
    if let Some(p) = &args.report {
        emit(Some(p), &(crate::json::to_string_sig17(&rows) + "\n"))?;
    }
    let failures: Vec<String> = rows.iter().flat_map(|a| a.failures()).collect();
    if failures.is_empty() {
        return Ok(());
    }
    for f in &failures {
        eprintln!("{f}");
    }
    Err(CliError {
        status: ExitStatus::Internal,
        message: format!("{} verification failure(s)", failures.len()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(catalogue: bool, k: Vec<usize>, choice: Option<ChoiceSelection>) -> AnalyzeArgs {
        AnalyzeArgs {
            catalogue,
            k,
            r: None,
            ell: None,
            choice,
            check: true,
            out: None,
            report: None,
        }
    }

    #[test]
    fn selections() {
        assert_eq!(selection(&args(true, vec![], None)).unwrap().len(), 15);
        assert_eq!(
            selection(&args(true, vec![], Some(ChoiceSelection::Rational)))
                .unwrap()
                .len(),
            8
        );
        let one = selection(&args(false, vec![3], None)).unwrap();
        assert_eq!(one, vec![MethodId::new(3, 2, 2, AuxChoice::None)]);
        assert_eq!(
            selection(&args(false, vec![], None)).unwrap_err().status,
            ExitStatus::Config
        );
    }

    #[test]
    fn k3_row_matches_table() {
        let a = analyze_method(MethodId::new(3, 2, 2, AuxChoice::None), true).unwrap();
        assert_eq!(a.mismatches, Some(vec![]));
        assert!(a.failures().is_empty());
    }
}
