//! Command-line front end: `tabulate`, `analyze`, `locus`, `solve` and `wp`.
//!
//! Exit codes: 0 success, 1 internal error or failed verification, 2 invalid
//! configuration or usage, 3 solver failure.

mod analyze;
mod locus;
mod solve;
mod tabulate;
pub mod wp;

use std::ffi::OsString;
use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;

use clap::{Args, Parser, Subcommand};

use crate::analysis::AnalysisError;
use crate::blended::BlendedError;
use crate::construction::{
    assemble_glm, catalogue_triple, AuxChoice, ConstructionError, GlmTableau,
};
use crate::problems::{builtin, ingest, OdeProblem, ProblemError};
use crate::solver::SolverError;

pub use analyze::AnalyzeArgs;
pub use locus::LocusArgs;
pub use solve::SolveArgs;
pub use tabulate::TabulateArgs;
pub use wp::{MonotonicityReport, WorkPrecisionRecord, WpArgs};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "BLENDED_GBDF_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Internal = 1,
    Config = 2,
    SolverFailure = 3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub status: ExitStatus,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            status: ExitStatus::Config,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            status: ExitStatus::Internal,
            message: message.into(),
        }
    }

    pub fn solver(message: impl Into<String>) -> Self {
        Self {
            status: ExitStatus::SolverFailure,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<ConstructionError> for CliError {
    fn from(e: ConstructionError) -> Self {
        match e {
            ConstructionError::Linalg(_) => CliError::internal(e.to_string()),
            _ => CliError::config(e.to_string()),
        }
    }
}

impl From<BlendedError> for CliError {
    fn from(e: BlendedError) -> Self {
        match e {
            BlendedError::BadGamma(_) => CliError::config(e.to_string()),
            _ => CliError::internal(e.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Resolution(..) | AnalysisError::Window(..) => {
                CliError::config(e.to_string())
            }
            _ => CliError::internal(e.to_string()),
        }
    }
}

impl From<ProblemError> for CliError {
    fn from(e: ProblemError) -> Self {
        match e {
            ProblemError::NoReference { .. } => CliError::solver(e.to_string()),
            _ => CliError::config(e.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        if e.is_configuration() {
            CliError::config(e.to_string())
        } else {
            CliError::solver(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "blended-gbdf",
    version,
    about = "L-stable block GBDF methods with the blended iteration"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Assemble a method and print or export its tableau.
    Tabulate(TabulateArgs),
    /// Blended-iteration parameters and stability checks.
    Analyze(AnalyzeArgs),
    /// Boundary locus of the stability region on a rectangle.
    Locus(LocusArgs),
    /// Integrate a problem.
    Solve(SolveArgs),
    /// Work-precision sweep over methods and tolerances.
    Wp(WpArgs),
}

/// Method given by its order, optionally with an explicit blocksize and
/// number of carried points.
#[derive(Debug, Clone, Args)]
pub struct MethodArgs {
    /// Order k.
    #[arg(long)]
    pub k: usize,
    /// Blocksize r (defaults to the catalogue value for k).
    #[arg(long, requires = "ell")]
    pub r: Option<usize>,
    /// Number ℓ of points carried to the next block.
    #[arg(long, requires = "r")]
    pub ell: Option<usize>,
    /// Auxiliary-point placement: 1 (geometric) or 2 (rational).
    #[arg(long)]
    pub choice: Option<AuxChoice>,
}

impl MethodArgs {
    pub fn triple(&self) -> Result<(usize, usize, usize), CliError> {
        match (self.r, self.ell) {
            (Some(r), Some(ell)) => Ok((self.k, r, ell)),
            _ => catalogue_triple(self.k).ok_or_else(|| {
                CliError::config(format!(
                    "order {} is not in the catalogue; give --r and --ell",
                    self.k
                ))
            }),
        }
    }

    pub fn tableau(&self) -> Result<GlmTableau, CliError> {
        let (k, r, ell) = self.triple()?;
        Ok(assemble_glm(
            k,
            r,
            ell,
            resolve_choice(r, ell, self.choice),
        )?)
    }
}

/// Blocks without auxiliary points have no placement to choose; otherwise
/// the rational placement is the default.
pub fn resolve_choice(r: usize, ell: usize, choice: Option<AuxChoice>) -> AuxChoice {
    if r <= ell {
        AuxChoice::None
    } else {
        match choice {
            None | Some(AuxChoice::None) => AuxChoice::Rational,
            Some(c) => c,
        }
    }
}

/// Built-in problem by name, or a problem file.
pub fn load_problem(name: Option<&str>, file: Option<&Path>) -> Result<OdeProblem, CliError> {
    match (name, file) {
        (Some(_), Some(_)) => Err(CliError::config(
            "give either --problem or --problem-file, not both",
        )),
        (Some(n), None) => Ok(builtin(n)?),
        (None, Some(p)) => Ok(ingest(p)?),
        (None, None) => Err(CliError::config("no problem given")),
    }
}

/// Thread pool sized by [`THREADS_ENV`] when set.
pub fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::config(format!(
                "{THREADS_ENV} must be a positive integer, got '{v}'"
            ))
        })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::internal(format!("cannot start thread pool: {e}")))
}

/// Writes `text` to `path`, or to standard output when `path` is `None`.
pub(crate) fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::config(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::internal(format!("cannot write to stdout: {e}")))
        }
    }
}

pub(crate) fn create(path: &Path) -> Result<std::fs::File, CliError> {
    std::fs::File::create(path)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", path.display())))
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    let pool = thread_pool()?;
    pool.install(|| match cli.command {
        Command::Tabulate(a) => tabulate::run(&a),
        Command::Analyze(a) => analyze::run(&a),
        Command::Locus(a) => locus::run(&a),
        Command::Solve(a) => solve::run(&a),
        Command::Wp(a) => wp::run(&a),
    })
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitStatus::Config as i32
            } else {
                ExitStatus::Success as i32
            };
        }
    };
    match panic::catch_unwind(AssertUnwindSafe(|| dispatch(cli))) {
        Ok(Ok(())) => ExitStatus::Success as i32,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            e.status as i32
        }
        Err(_) => {
            eprintln!("error: internal failure");
            ExitStatus::Internal as i32
        }
    }
}

pub(crate) fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<&str> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err(CliError::config(format!("{what} is empty")));
    }
    items
        .into_iter()
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| CliError::config(format!("bad {what} entry '{s}': {e}")))
        })
        .collect()
}
