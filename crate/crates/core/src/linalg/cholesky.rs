//! Plain `L Lᵀ` Cholesky factorization and the helpers built on it
//! (positive definiteness checks, inverses, log-determinants).

use super::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Clone, Debug)]
pub struct Cholesky<F> {
    lower: DenseMatrix<F>,
}

impl<F: Scalar> Cholesky<F> {
    /// Factors `a`; only the lower triangle is read.
    pub fn new(a: &DenseMatrix<F>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::SizeMismatch {
                expected: a.nrows(),
                found: a.ncols(),
            });
        }
        let p = a.nrows();
        let mut l = DenseMatrix::zeros(p, p);
        for j in 0..p {
            let lj = l.row(j)[..j].to_vec();
            let pivot = a[(j, j)] - dot(&lj, &lj);
            if !(pivot > F::zero()) || !pivot.is_finite() {
                return Err(Error::NotPositiveDefinite {
                    index: j,
                    pivot: pivot.as_f64(),
                });
            }
            let d = pivot.sqrt();
            l[(j, j)] = d;
            for i in j + 1..p {
                let s = a[(i, j)] - dot(&l.row(i)[..j], &lj);
                l[(i, j)] = s / d;
            }
        }
        Ok(Self { lower: l })
    }

    pub fn lower(&self) -> &DenseMatrix<F> {
        &self.lower
    }

    pub fn log_det(&self) -> F {
        let two = F::of(2.0);
        self.lower
            .diagonal()
            .into_iter()
            .map(|d| two * d.ln())
            .sum()
    }

    /// Solves `L x = b` in place.
    pub fn solve_lower_in_place(&self, b: &mut [F]) {
        let l = &self.lower;
        for i in 0..b.len() {
            let s = b[i] - dot(&l.row(i)[..i], &b[..i]);
            b[i] = s / l[(i, i)];
        }
    }

    /// Solves `Lᵀ x = b` in place.
    pub fn solve_upper_in_place(&self, b: &mut [F]) {
        let l = &self.lower;
        for i in (0..b.len()).rev() {
            let mut s = b[i];
            for k in i + 1..b.len() {
                s = s - l[(k, i)] * b[k];
            }
            b[i] = s / l[(i, i)];
        }
    }

    pub fn solve(&self, b: &[F]) -> Vec<F> {
        let mut x = b.to_vec();
        self.solve_lower_in_place(&mut x);
        self.solve_upper_in_place(&mut x);
        x
    }

    /// Inverse of the factored matrix, exactly symmetric.
    pub fn inverse(&self) -> DenseMatrix<F> {
        let p = self.lower.nrows();
        let mut inv = DenseMatrix::zeros(p, p);
        let mut e = vec![F::zero(); p];
        for j in 0..p {
            e.iter_mut().for_each(|x| *x = F::zero());
            e[j] = F::one();
            let col = self.solve(&e);
            for i in j..p {
                inv[(i, j)] = col[i];
            }
        }
        for i in 0..p {
            for j in i + 1..p {
                inv[(i, j)] = inv[(j, i)];
            }
        }
        inv
    }

    /// Computes `L⁻¹ A L⁻ᵀ` for symmetric `A`.
    pub fn whiten(&self, a: &DenseMatrix<F>) -> DenseMatrix<F> {
        let p = self.lower.nrows();
        // B = L⁻¹ A, column by column
        let mut b = DenseMatrix::zeros(p, p);
        for j in 0..p {
            let mut col = a.column(j);
            self.solve_lower_in_place(&mut col);
            for i in 0..p {
                b[(i, j)] = col[i];
            }
        }
        // C = L⁻¹ Bᵀ = L⁻¹ A L⁻ᵀ since A is symmetric
        let mut c = DenseMatrix::zeros(p, p);
        for j in 0..p {
            let mut col = b.row(j).to_vec();
            self.solve_lower_in_place(&mut col);
            for i in 0..p {
                c[(i, j)] = col[i];
            }
        }
        for i in 0..p {
            for j in 0..i {
                let m = (c[(i, j)] + c[(j, i)]) / F::of(2.0);
                c[(i, j)] = m;
                c[(j, i)] = m;
            }
        }
        c
    }
}

/// Inverse of a symmetric positive definite matrix.
pub fn spd_inverse<F: Scalar>(a: &DenseMatrix<F>) -> Result<DenseMatrix<F>> {
    Ok(Cholesky::new(a)?.inverse())
}
