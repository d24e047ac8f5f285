//! Assembles the fourth-order method on four points and prints its matrices,
//! scaled by the common denominator of the rational grid.

use blended_gbdf::blended::optimize_gamma;
use blended_gbdf::construction::{assemble_glm, AuxChoice, TableauDocument};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t = assemble_glm(4, 4, 3, AuxChoice::Rational)?;
    println!("abscissae {:?}", t.c());
    let den = 6336684.0;
    for (name, m) in [("A", t.a()), ("U", t.u())] {
        println!("{name} * {den}:");
        for i in 0..t.r() {
            let row: Vec<String> = m
                .row(i)
                .iter()
                .map(|v| format!("{:>10}", (v * den).round()))
                .collect();
            println!("  {}", row.join(" "));
        }
    }
    let opt = optimize_gamma(t.a())?;
    let doc = TableauDocument::from_tableau(&t.with_gamma(opt.params.gamma));
    println!("{}", doc.to_json());
    Ok(())
}
