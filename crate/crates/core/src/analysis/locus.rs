use std::collections::HashMap;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::{stability_radius, AnalysisError, LinearMethod};
use crate::blended::convergence_params;
use crate::linalg::Complex64;

/// Bisection steps used to place a contour crossing on a cell edge.
const CROSSING_BISECTIONS: usize = 30;

/// Axis-aligned rectangle of the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self, AnalysisError> {
        for (lo, hi) in [(re_min, re_max), (im_min, im_max)] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(AnalysisError::Window(lo, hi));
            }
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    /// `[−half, half]²`.
    pub fn square(half: f64) -> Result<Self, AnalysisError> {
        Self::new(-half, half, -half, half)
    }

    fn re(&self, i: usize, nx: usize) -> f64 {
        self.re_min + (self.re_max - self.re_min) * i as f64 / (nx - 1) as f64
    }

    fn im(&self, j: usize, ny: usize) -> f64 {
        self.im_min + (self.im_max - self.im_min) * j as f64 / (ny - 1) as f64
    }
}

/// Parses `re_min,re_max,im_min,im_max`.
impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v: Vec<f64> = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("bad window bound '{p}': {e}"))
            })
            .collect::<Result<_, _>>()?;
        if v.len() != 4 {
            return Err(format!(
                "window needs 4 comma-separated numbers, got {}",
                v.len()
            ));
        }
        Window::new(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
    }
}

fn check_resolution(nx: usize, ny: usize) -> Result<(), AnalysisError> {
    if nx < 2 || ny < 2 {
        return Err(AnalysisError::Resolution(nx, ny));
    }
    Ok(())
}

fn scan(window: &Window, nx: usize, ny: usize, f: impl Fn(Complex64) -> f64 + Sync) -> Vec<f64> {
    (0..nx * ny)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % nx, idx / nx);
            f(Complex64::new(window.re(i, nx), window.im(j, ny)))
        })
        .collect()
}

fn write_grid<W: Write>(
    out: W,
    window: &Window,
    nx: usize,
    ny: usize,
    values: &[f64],
    name: &str,
) -> Result<(), AnalysisError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["re", "im", name])?;
    for j in 0..ny {
        for i in 0..nx {
            w.write_record([
                format!("{:.10e}", window.re(i, nx)),
                format!("{:.10e}", window.im(j, ny)),
                format!("{:.10e}", values[j * nx + i]),
            ])?;
        }
    }
    w.flush().map_err(|e| AnalysisError::Csv(e.to_string()))
}

/// Scan of `ρ(R(q))` with its level-1 contour.
#[derive(Debug, Clone, PartialEq)]
pub struct LocusData {
    pub window: Window,
    pub nx: usize,
    pub ny: usize,
    /// `ρ(R(q))` at `(re_i, im_j)`, index `j·nx + i`; `+∞` where singular.
    pub radius: Vec<f64>,
    /// Contour polylines as `(re, im)` points.
    pub contour: Vec<Vec<(f64, f64)>>,
}

impl LocusData {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.radius[j * self.nx + i]
    }

    pub fn contour_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.contour.iter().flatten().copied()
    }

    /// CSV with header `re,im,radius`.
    pub fn write_grid_csv<W: Write>(&self, out: W) -> Result<(), AnalysisError> {
        write_grid(out, &self.window, self.nx, self.ny, &self.radius, "radius")
    }

    /// CSV with header `re,im,segment`, one row per polyline vertex.
    pub fn write_contour_csv<W: Write>(&self, out: W) -> Result<(), AnalysisError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["re", "im", "segment"])?;
        for (id, line) in self.contour.iter().enumerate() {
            for (re, im) in line {
                w.write_record([format!("{re:.10e}"), format!("{im:.10e}"), id.to_string()])?;
            }
        }
        w.flush().map_err(|e| AnalysisError::Csv(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    /// `(i, j)–(i+1, j)`
    H(usize, usize),
    /// `(i, j)–(i, j+1)`
    V(usize, usize),
}

impl Edge {
    fn ends(self) -> ((usize, usize), (usize, usize)) {
        match self {
            Edge::H(i, j) => ((i, j), (i + 1, j)),
            Edge::V(i, j) => ((i, j), (i, j + 1)),
        }
    }
}

/// Level-1 contour of `ρ(R(q))` by marching squares. Crossings are placed on
/// cell edges by bisection on the true spectral radius, so contour points lie
/// on the locus to within `2⁻³⁰` of a grid step. Segments are chained into
/// polylines through shared edges.
pub fn boundary_locus<M: LinearMethod + ?Sized>(
    method: &M,
    window: Window,
    nx: usize,
    ny: usize,
) -> Result<LocusData, AnalysisError> {
    check_resolution(nx, ny)?;
    let radius = scan(&window, nx, ny, |q| stability_radius(method, q));
    let inside = |i: usize, j: usize| radius[j * nx + i] < 1.0;
    let point = |(i, j): (usize, usize)| Complex64::new(window.re(i, nx), window.im(j, ny));

    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let c = [
                inside(i, j),
                inside(i + 1, j),
                inside(i + 1, j + 1),
                inside(i, j + 1),
            ];
            let edges = [
                Edge::H(i, j),
                Edge::V(i + 1, j),
                Edge::H(i, j + 1),
                Edge::V(i, j),
            ];
            let cut: Vec<usize> = (0..4).filter(|&e| c[e] != c[(e + 1) % 4]).collect();
            match cut.len() {
                2 => segments.push((edges[cut[0]], edges[cut[1]])),
                4 => {
                    let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
                    let centre: f64 = corners
                        .iter()
                        .map(|&(a, b)| radius[b * nx + a].min(1e300))
                        .sum::<f64>()
                        / 4.0;
                    if (centre < 1.0) == c[0] {
                        segments.push((edges[0], edges[1]));
                        segments.push((edges[2], edges[3]));
                    } else {
                        segments.push((edges[3], edges[0]));
                        segments.push((edges[1], edges[2]));
                    }
                }
                _ => {}
            }
        }
    }

    let mut cut_edges: Vec<Edge> = segments.iter().flat_map(|s| [s.0, s.1]).collect();
    cut_edges.sort_by_key(|e| match *e {
        Edge::H(i, j) => (0, j, i),
        Edge::V(i, j) => (1, j, i),
    });
    cut_edges.dedup();
    let crossings: HashMap<Edge, (f64, f64)> = cut_edges
        .par_iter()
        .map(|&e| {
            let (a, b) = e.ends();
            let (mut p_in, mut p_out) = if inside(a.0, a.1) {
                (point(a), point(b))
            } else {
                (point(b), point(a))
            };
            for _ in 0..CROSSING_BISECTIONS {
                let mid = (p_in + p_out) * 0.5;
                if stability_radius(method, mid) < 1.0 {
                    p_in = mid;
                } else {
                    p_out = mid;
                }
            }
            let z = (p_in + p_out) * 0.5;
            (e, (z.re, z.im))
        })
        .collect();

    let contour = chain(&segments)
        .into_iter()
        .map(|line| line.iter().map(|e| crossings[e]).collect())
        .collect();
    Ok(LocusData {
        window,
        nx,
        ny,
        radius,
        contour,
    })
}

fn chain(segments: &[(Edge, Edge)]) -> Vec<Vec<Edge>> {
    let mut by_edge: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, s) in segments.iter().enumerate() {
        by_edge.entry(s.0).or_default().push(k);
        by_edge.entry(s.1).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let mut line = vec![segments[start].0, segments[start].1];
        for forward in [true, false] {
            loop {
                let tip = if forward {
                    *line.last().unwrap()
                } else {
                    line[0]
                };
                let next = by_edge[&tip].iter().copied().find(|&k| !used[k]);
                let Some(k) = next else { break };
                used[k] = true;
                let s = segments[k];
                let other = if s.0 == tip { s.1 } else { s.0 };
                if forward {
                    line.push(other);
                } else {
                    line.insert(0, other);
                }
            }
        }
        lines.push(line);
    }
    lines
}

/// `ρ(q) = |q|/|1 − γq|²·ρ̃` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionGrid {
    pub window: Window,
    pub nx: usize,
    pub ny: usize,
    pub gamma: f64,
    pub rho_tilde: f64,
    pub values: Vec<f64>,
}

impl RegionGrid {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    /// CSV with header `re,im,rho`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), AnalysisError> {
        write_grid(out, &self.window, self.nx, self.ny, &self.values, "rho")
    }
}

/// Convergence factor of the blended iteration over a window, for a method
/// whose `γ` has been set.
pub fn convergence_region<M: LinearMethod + ?Sized>(
    method: &M,
    window: Window,
    nx: usize,
    ny: usize,
) -> Result<RegionGrid, AnalysisError> {
    check_resolution(nx, ny)?;
    let gamma = method.blended_gamma().ok_or(AnalysisError::MissingGamma)?;
    let params = convergence_params(method.stage_matrix(), gamma)
        .map_err(|e| AnalysisError::Blended(e.to_string()))?;
    let values = scan(&window, nx, ny, |q| params.rho_at(q));
    Ok(RegionGrid {
        window,
        nx,
        ny,
        gamma,
        rho_tilde: params.rho_tilde,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::MatrixMethod;
    use crate::blended::optimize_gamma;
    use crate::construction::{assemble_glm, AuxChoice};
    use crate::linalg::DenseMatrix;

    #[test]
    fn backward_euler_circle() {
        let m = MatrixMethod::new(DenseMatrix::identity(1), DenseMatrix::identity(1)).unwrap();
        let loc = boundary_locus(&m, Window::new(-1.0, 3.0, -2.0, 2.0).unwrap(), 81, 81).unwrap();
        assert_eq!(loc.contour.len(), 1);
        let mut n = 0;
        for (re, im) in loc.contour_points() {
            let d = ((1.0 - re).powi(2) + im * im).sqrt();
            assert!((d - 1.0).abs() < 1e-6, "{re} {im}");
            n += 1;
        }
        assert!(n > 100);
        let line = &loc.contour[0];
        assert_eq!(line.first(), line.last(), "closed curve");
    }

    #[test]
    fn third_order_locus_in_right_half_plane() {
        let t = assemble_glm(3, 2, 2, AuxChoice::None).unwrap();
        let loc = boundary_locus(&t, Window::square(10.0).unwrap(), 120, 120).unwrap();
        assert!(loc.contour_points().count() > 0);
        assert!(loc.contour_points().all(|(re, _)| re > -1e-6));
        let mut buf = Vec::new();
        loc.write_contour_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("re,im,segment\n"));
    }

    #[test]
    fn region_peaks_near_inverse_gamma() {
        let t = assemble_glm(4, 4, 3, AuxChoice::Rational).unwrap();
        let p = optimize_gamma(t.a()).unwrap().params;
        let t = t.with_gamma(p.gamma);
        let grid =
            convergence_region(&t, Window::new(-1.0, 0.0, 0.0, 4.0).unwrap(), 2, 401).unwrap();
        // right column is the imaginary axis
        let (mut best, mut arg) = (0.0, 0);
        for j in 0..401 {
            if grid.value(1, j) > best {
                best = grid.value(1, j);
                arg = j;
            }
        }
        let step = 4.0 / 400.0;
        assert!((arg as f64 * step - 1.0 / p.gamma).abs() <= step);
        assert!((best - p.rho_star).abs() < 1e-4);
        assert!(matches!(
            convergence_region(
                &assemble_glm(3, 2, 2, AuxChoice::None).unwrap(),
                Window::square(1.0).unwrap(),
                3,
                3
            ),
            Err(AnalysisError::MissingGamma)
        ));
    }

    #[test]
    fn window_parsing() {
        let w: Window = "-1,2,-3,4".parse().unwrap();
        assert_eq!(w, Window::new(-1.0, 2.0, -3.0, 4.0).unwrap());
        assert!("1,0,0,1".parse::<Window>().is_err());
        assert!("1,2".parse::<Window>().is_err());
    }
}
