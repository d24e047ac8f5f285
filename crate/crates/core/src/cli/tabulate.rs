use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;

use super::{emit, CliError, MethodArgs};
use crate::blended::optimize_gamma;
use crate::construction::{GlmTableau, TableauDocument};
use crate::linalg::DenseMatrix;

#[derive(Debug, Clone, Args)]
pub struct TabulateArgs {
    #[command(flatten)]
    pub method: MethodArgs,
    /// Write the tableau JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the JSON instead of the matrices.
    #[arg(long)]
    pub json: bool,
}

fn push_matrix(text: &mut String, name: &str, m: &DenseMatrix) {
    let _ = writeln!(text, "{name} =");
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:>22.14e}")).collect();
        let _ = writeln!(text, "  [{}]", row.join(" "));
    }
}

fn push_vector(text: &mut String, name: &str, v: &[f64]) {
    let row: Vec<String> = v.iter().map(|x| format!("{x:.14e}")).collect();
    let _ = writeln!(text, "{name} = [{}]", row.join(", "));
}

/// Matrices and abscissae with 15 significant digits.
pub fn render(t: &GlmTableau) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "method {} nu={} choice={}", t.id(), t.nu(), t.choice());
    push_vector(&mut s, "c", t.c());
    push_vector(&mut s, "xi", t.xi());
    match t.gamma() {
        Some(g) => {
            let _ = writeln!(s, "gamma = {g:.14e}");
        }
        None => s.push_str("gamma = none\n"),
    }
    push_matrix(&mut s, "A", t.a());
    push_matrix(&mut s, "U", t.u());
    push_matrix(&mut s, "A1", t.a1());
    push_matrix(&mut s, "A2", t.a2());
    s
}

pub fn run(args: &TabulateArgs) -> Result<(), CliError> {
    let t = args.method.tableau()?;
    let t = match optimize_gamma(t.a()) {
        Ok(opt) => t.with_gamma(opt.params.gamma),
        Err(e) => {
            eprintln!("warning: no blended parameter: {e}");
            t
        }
    };
    let json = TableauDocument::from_tableau(&t).to_json() + "\n";
    if let Some(p) = &args.out {
        emit(Some(p), &json)?;
    }
    if args.json {
        emit(None, &json)
    } else {
        emit(None, &render(&t))
    }
}
