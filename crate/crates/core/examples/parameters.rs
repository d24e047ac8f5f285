//! Optimal blending parameter and convergence constants for the catalogue.

use blended_gbdf::analysis::check_stability;
use blended_gbdf::blended::optimize_gamma;
use blended_gbdf::construction::{catalogue, AuxChoice};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for choice in [AuxChoice::Geometric, AuxChoice::Rational] {
        println!("{choice:?} auxiliary points");
        println!("   k   r  r-l   gamma  rho~    rho_inf  rho*    L-stable");
        for t in catalogue(choice)? {
            let p = optimize_gamma(t.a())?.params;
            let st = check_stability(&t.clone().with_gamma(p.gamma));
            println!(
                "{:>4}{:>4}{:>5}  {:.4}  {:.4}  {:.4}   {:.4}  {}",
                t.k(),
                t.r(),
                t.r() - t.ell(),
                p.gamma,
                p.rho_tilde,
                p.rho_inf,
                p.rho_star,
                st.l_stable
            );
        }
    }
    Ok(())
}
