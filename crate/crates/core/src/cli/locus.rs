use std::path::{Path, PathBuf};

use clap::Args;

use super::{create, CliError, MethodArgs};
use crate::analysis::{boundary_locus, convergence_region, Window};
use crate::blended::optimize_gamma;

#[derive(Debug, Clone, Args)]
pub struct LocusArgs {
    #[command(flatten)]
    pub method: MethodArgs,
    /// Rectangle `re_min,re_max,im_min,im_max`.
    #[arg(long, default_value = "-10,10,-10,10", allow_hyphen_values = true)]
    pub window: Window,
    /// Grid points per axis, `N` or `NXxNY`.
    #[arg(long, default_value = "200")]
    pub res: String,
    /// Grid CSV (`re,im,radius`).
    #[arg(long)]
    pub out: PathBuf,
    /// Contour CSV (`re,im,segment`); defaults to the grid path with a
    /// `_contour` suffix.
    #[arg(long)]
    pub contour: Option<PathBuf>,
    /// Also write the convergence factor of the blended iteration
    /// (`re,im,rho`) here.
    #[arg(long)]
    pub region: Option<PathBuf>,
}

pub fn parse_resolution(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::config(format!("bad resolution '{s}': expected N or NXxNY"));
    let parts: Vec<&str> = s.split(['x', 'X']).collect();
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
        .collect::<Result<Vec<_>, _>>()?;
    match nums[..] {
        [n] => Ok((n, n)),
        [nx, ny] => Ok((nx, ny)),
        _ => Err(bad()),
    }
}

fn contour_path(grid: &Path) -> PathBuf {
    let stem = grid
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "locus".into());
    grid.with_file_name(format!("{stem}_contour.csv"))
}

pub fn run(args: &LocusArgs) -> Result<(), CliError> {
    let (nx, ny) = parse_resolution(&args.res)?;
    let t = args.method.tableau()?;
    let t = match optimize_gamma(t.a()) {
        Ok(opt) => t.with_gamma(opt.params.gamma),
        Err(_) => t,
    };
    let data = boundary_locus(&t, args.window, nx, ny)?;
    data.write_grid_csv(create(&args.out)?)?;
    let cpath = args
        .contour
        .clone()
        .unwrap_or_else(|| contour_path(&args.out));
    data.write_contour_csv(create(&cpath)?)?;
    if let Some(p) = &args.region {
        convergence_region(&t, args.window, nx, ny)?.write_csv(create(p)?)?;
    }
    let min_re = data
        .contour_points()
        .map(|(re, _)| re)
        .fold(f64::INFINITY, f64::min);
    println!(
        "method {}: {} contour segment(s), {} points, min Re on contour {}",
        t.id(),
        data.contour.len(),
        data.contour_points().count(),
        if min_re.is_finite() {
            format!("{min_re:.6e}")
        } else {
            "none".into()
        }
    );
    Ok(())
}
