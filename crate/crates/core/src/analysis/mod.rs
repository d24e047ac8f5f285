//! Linear stability of the methods and convergence regions of the blended
//! iteration, as pointwise evaluations and as scans over rectangles of the
//! complex `q = hλ` plane.

mod locus;
mod stability;

pub use locus::{boundary_locus, convergence_region, LocusData, RegionGrid, Window};
pub use stability::{
    check_stability, stability_matrix, stability_radius, LinearMethod, MatrixMethod,
    StabilityReport, IMAG_AXIS_SAMPLES, LARGE_Q,
};

use crate::linalg::LinalgError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("I - qA is singular at q = {re} + {im}i")]
    SingularAtQ { re: f64, im: f64 },
    #[error("scan resolution must be at least 2 per axis, got {0}x{1}")]
    Resolution(usize, usize),
    #[error("empty or inverted window [{0}, {1}]")]
    Window(f64, f64),
    #[error("stage and input matrices differ in shape")]
    Shape,
    #[error("method has no blended parameter")]
    MissingGamma,
    #[error("blended parameters: {0}")]
    Blended(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("csv output failed: {0}")]
    Csv(String),
}

impl From<csv::Error> for AnalysisError {
    fn from(e: csv::Error) -> Self {
        AnalysisError::Csv(e.to_string())
    }
}
