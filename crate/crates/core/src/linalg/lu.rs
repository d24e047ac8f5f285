use super::{LinalgError, Matrix, Scalar};

/// Pivots smaller than this fraction of the largest input entry are treated
/// as exact zeros.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-14;

/// Packed partial-pivoting factorization `P·M = L·U`.
#[derive(Debug, Clone)]
pub struct LuFactorization<T> {
    factors: Matrix<T>,
    /// `perm[i]` is the row of the original matrix stored at row `i`.
    perm: Vec<usize>,
    swaps: usize,
}

/// Factorizes a square matrix, failing loudly on (numerical) singularity.
pub fn lu_factor<T: Scalar>(m: &Matrix<T>) -> Result<LuFactorization<T>, LinalgError> {
    let n = m.require_square()?;
    let scale = m.max_abs();
    let threshold = SINGULAR_PIVOT_RATIO * scale;
    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut swaps = 0;

    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|i| (i, a[(i, k)].modulus()))
            .fold(
                (k, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if pivot <= threshold || scale == 0.0 {
            return Err(LinalgError::SingularMatrix {
                column: k,
                pivot,
                threshold,
            });
        }
        if p != k {
            for j in 0..n {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(p, j)];
                a[(p, j)] = tmp;
            }
            perm.swap(k, p);
            swaps += 1;
        }
        let d = a[(k, k)];
        for i in k + 1..n {
            let l = a[(i, k)] / d;
            a[(i, k)] = l;
            if l == T::zero() {
                continue;
            }
            for j in k + 1..n {
                let u = a[(k, j)];
                a[(i, j)] -= l * u;
            }
        }
    }
    Ok(LuFactorization {
        factors: a,
        perm,
        swaps,
    })
}

impl<T: Scalar> LuFactorization<T> {
    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn factors(&self) -> &Matrix<T> {
        &self.factors
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Solves in place; `x` holds the right-hand side on entry.
    ///
    /// `scratch` must have the same length as `x`; it avoids an allocation in
    /// the solver's inner loop.
    pub fn solve_into(&self, x: &mut [T], scratch: &mut [T]) -> Result<(), LinalgError> {
        let n = self.dim();
        if x.len() != n || scratch.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: (n, 1),
                got: (x.len(), 1),
            });
        }
        for i in 0..n {
            scratch[i] = x[self.perm[i]];
        }
        let lu = &self.factors;
        for i in 0..n {
            let mut s = scratch[i];
            for j in 0..i {
                s -= lu[(i, j)] * scratch[j];
            }
            scratch[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = scratch[i];
            for j in i + 1..n {
                s -= lu[(i, j)] * scratch[j];
            }
            scratch[i] = s / lu[(i, i)];
        }
        x.copy_from_slice(scratch);
        Ok(())
    }

    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>, LinalgError> {
        let mut x = rhs.to_vec();
        let mut scratch = vec![T::zero(); rhs.len()];
        self.solve_into(&mut x, &mut scratch)?;
        Ok(x)
    }

    /// Solves `M·X = B` column by column.
    pub fn solve_matrix(&self, rhs: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
        let n = self.dim();
        if rhs.rows() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: (n, rhs.cols()),
                got: rhs.shape(),
            });
        }
        let mut out = Matrix::zeros(n, rhs.cols());
        let mut col = vec![T::zero(); n];
        let mut scratch = vec![T::zero(); n];
        for j in 0..rhs.cols() {
            for i in 0..n {
                col[i] = rhs[(i, j)];
            }
            self.solve_into(&mut col, &mut scratch)?;
            for i in 0..n {
                out[(i, j)] = col[i];
            }
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Matrix<T> {
        self.solve_matrix(&Matrix::identity(self.dim()))
            .expect("identity has matching dimension")
    }

    pub fn determinant(&self) -> T {
        let mut det = if self.swaps.is_multiple_of(2) {
            T::one()
        } else {
            -T::one()
        };
        for i in 0..self.dim() {
            det *= self.factors[(i, i)];
        }
        det
    }
}
