//! Robertson's reaction at three orders, checked against a self-reference.

use blended_gbdf::construction::AuxChoice;
use blended_gbdf::problems::{builtin, reference_solution, scd};
use blended_gbdf::solver::{integrate, SolverMethod, SolverOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = builtin("robertson")?;
    let reference = reference_solution(&p, p.t_end, None)?;
    for k in [4, 6, 8] {
        let method = SolverMethod::new(k, AuxChoice::Rational)?;
        let opts = SolverOptions {
            rtol: 1e-6,
            atol: 1e-10,
            record_steps: false,
            ..Default::default()
        };
        let res = integrate(&p, &method, opts)?;
        let s = &res.stats;
        println!(
            "k={k}: {} steps, {} rejected, {} factorizations, scd {:.2}",
            s.steps,
            s.rejected,
            s.factorizations,
            scd(&res.y_final, &reference.y, 1e-10)
        );
    }
    Ok(())
}
