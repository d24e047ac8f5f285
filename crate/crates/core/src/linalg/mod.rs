//! Small dense real/complex kernels.
//!
//! Everything in this crate works with matrices of dimension at most a few
//! dozen (block sizes up to 11, problem dimensions up to ~100), so the
//! routines here favour robustness over throughput: row-major storage,
//! partial-pivoting LU, and a complex Hessenberg/shifted-QR eigenvalue solver.

mod eigen;
mod lu;
mod matrix;
mod roots;

pub use eigen::{complex_eigenvalues, complex_spectral_radius, eigenvalues, spectral_radius};
pub use lu::{lu_factor, LuFactorization, SINGULAR_PIVOT_RATIO};
pub use matrix::{ComplexMatrix, DenseMatrix, Matrix, Scalar};
pub use roots::positive_poly_root;

pub use num_complex::Complex64;

/// Complex scalar used for `q = hλ` and for spectra.
pub type ComplexScalar = Complex64;

/// Errors raised by the dense kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error(
        "matrix is singular: pivot {pivot:.3e} below threshold {threshold:.3e} at column {column}"
    )]
    SingularMatrix {
        column: usize,
        pivot: f64,
        threshold: f64,
    },
    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix must have at least one row and one column")]
    Empty,
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("QR iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("polynomial has no sign change on (0, 1]")]
    NoSignChange,
}
