//! Work-precision data for the pollution problem: accuracy and standardized
//! cost per tolerance.

use blended_gbdf::cli::wp::{monotonicity, sweep};
use blended_gbdf::construction::AuxChoice;
use blended_gbdf::problems::{builtin, reference_solution};
use blended_gbdf::solver::SolverMethod;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = builtin("pollution")?;
    let reference = reference_solution(&p, p.t_end, None)?;
    let methods = [
        SolverMethod::new(4, AuxChoice::Rational)?,
        SolverMethod::new(6, AuxChoice::Rational)?,
    ];
    let records = sweep(&p, &methods, &[1e-4, 1e-6, 1e-8, 1e-10], &reference.y);
    println!(" k   rtol     scd     cost");
    for r in &records {
        println!("{:>2}  {:.0e}  {:6.2}  {:.3e}", r.k, r.rtol, r.scd, r.cost);
    }
    let m = monotonicity(&records);
    println!(
        "scd increased in {}/{} tolerance steps",
        m.increased, m.pairs
    );
    Ok(())
}
