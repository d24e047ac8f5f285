//! Driving the engine step by step on Van der Pol, reporting every change
//! of stepsize.

use blended_gbdf::construction::AuxChoice;
use blended_gbdf::problems::vanderpol;
use blended_gbdf::solver::{Engine, SolverMethod, SolverOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = vanderpol(1e-3);
    let method = SolverMethod::new(6, AuxChoice::Rational)?;
    let opts = SolverOptions {
        rtol: 1e-6,
        atol: 1e-8,
        ..Default::default()
    };
    let mut engine = Engine::new(&p, &method, opts)?;
    engine.start()?;
    while !engine.finished() {
        let t = engine.t();
        let o = engine.advance()?;
        if !o.accepted || o.new_h != o.h {
            println!(
                "t={t:.5} h={:.3e} -> {:.3e} err {:.2} {}",
                o.h,
                o.new_h,
                o.error_norm,
                if o.accepted { "" } else { "rejected" }
            );
        }
    }
    let s = engine.stats();
    println!(
        "{} steps, {} rejected, y = {:?}",
        s.steps,
        s.rejected,
        engine.current()
    );
    Ok(())
}
