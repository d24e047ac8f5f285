//! A problem described in JSON: a forced linear system with piecewise
//! polynomial forcing.

use blended_gbdf::construction::AuxChoice;
use blended_gbdf::problems::ingest_str;
use blended_gbdf::solver::{integrate, SolverMethod, SolverOptions};

const PROBLEM: &str = r#"{
    "name": "forced_decay",
    "dimension": 2,
    "y0": [1.0, 0.0],
    "t_span": [0.0, 2.0],
    "rtol": 1e-8,
    "atol": 1e-10,
    "rhs": {
        "type": "linear",
        "matrix": [[-1000.0, 1.0], [0.0, -0.5]],
        "forcing": {"breaks": [0.0, 1.0, 2.0], "pieces": [[[0.0], [1.0]], [[0.0], [0.0, -1.0]]]}
    }
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = ingest_str(PROBLEM)?;
    let method = SolverMethod::new(6, AuxChoice::Rational)?;
    let opts = SolverOptions {
        rtol: p.rtol,
        atol: p.atol,
        output_times: vec![0.5, 1.0, 1.5, 2.0],
        ..Default::default()
    };
    let res = integrate(&p, &method, opts)?;
    for s in &res.dense {
        println!("t = {:.2}: y = [{:.8e}, {:.8e}]", s.t, s.y[0], s.y[1]);
    }
    println!("{} steps, cost {:.0}", res.stats.steps, res.stats.cost);
    Ok(())
}
