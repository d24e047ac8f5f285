//! Boundary locus of the eighth-order method, written as CSV next to the
//! system temp directory.

use std::fs::File;

use blended_gbdf::analysis::{boundary_locus, Window};
use blended_gbdf::construction::{assemble_glm, AuxChoice};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t = assemble_glm(8, 6, 5, AuxChoice::Rational)?;
    let loc = boundary_locus(&t, Window::new(-5.0, 60.0, -40.0, 40.0)?, 200, 200)?;
    let min_re = loc
        .contour_points()
        .map(|(re, _)| re)
        .fold(f64::INFINITY, f64::min);
    println!(
        "{} contour segments, leftmost point at Re q = {min_re:.4}",
        loc.contour.len()
    );
    let dir = std::env::temp_dir();
    loc.write_grid_csv(File::create(dir.join("locus_k8.csv"))?)?;
    loc.write_contour_csv(File::create(dir.join("locus_k8_contour.csv"))?)?;
    println!("wrote {}", dir.join("locus_k8*.csv").display());
    Ok(())
}
