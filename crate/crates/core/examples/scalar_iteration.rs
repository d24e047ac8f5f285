//! The blended iteration on the test equation: observed contraction per
//! sweep against the predicted spectral radius.

use blended_gbdf::blended::{optimize_gamma, scalar_blended_iterate};
use blended_gbdf::construction::{assemble_glm, AuxChoice};
use blended_gbdf::linalg::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t = assemble_glm(6, 5, 4, AuxChoice::Rational)?;
    let p = optimize_gamma(t.a())?.params;
    let t = t.with_gamma(p.gamma);
    let eta = vec![Complex64::new(1.0, 0.0); t.r()];
    for q in [
        Complex64::new(-0.5, 0.0),
        Complex64::new(0.0, 1.0 / p.gamma),
        Complex64::new(-1e6, 0.0),
    ] {
        let hist = scalar_blended_iterate(&t, q, &eta, 40)?;
        let fixed = hist.last();
        let errs: Vec<f64> = hist
            .iterates
            .iter()
            .map(|y| {
                y.iter()
                    .zip(fixed)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max)
            })
            .collect();
        let observed = (errs[12] / errs[2]).powf(0.1);
        println!(
            "q = {q:.3}: predicted rho {:.4}, observed {observed:.4}",
            p.rho_at(q)
        );
    }
    Ok(())
}
