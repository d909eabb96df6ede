use rand_distr::{Distribution, StandardNormal};

use super::{Cholesky, DenseMatrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `n × p` observation matrix, stored column by column.
///
/// Column order is the variable ordering the Cholesky factor refers to and is
/// never changed by any operation.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix<F> {
    n: usize,
    columns: Vec<Vec<F>>,
}

impl<F: Scalar> DataMatrix<F> {
    pub fn from_columns(columns: Vec<Vec<F>>) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        if n == 0 || columns.is_empty() {
            return Err(Error::InvalidInput(
                "data matrix needs n >= 1 and p >= 1".into(),
            ));
        }
        for c in &columns {
            if c.len() != n {
                return Err(Error::SizeMismatch {
                    expected: n,
                    found: c.len(),
                });
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(
                    "data matrix holds a non-finite entry".into(),
                ));
            }
        }
        Ok(Self { n, columns })
    }

    /// Rows are observations.
    pub fn from_dense(m: &DenseMatrix<F>) -> Result<Self> {
        Self::from_columns((0..m.ncols()).map(|j| m.column(j)).collect())
    }

    pub fn from_rows<R: AsRef<[F]>>(rows: &[R]) -> Result<Self> {
        Self::from_dense(&DenseMatrix::from_rows(rows)?)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.columns.len()
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[F] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<F>] {
        &self.columns
    }

    pub fn to_dense(&self) -> DenseMatrix<F> {
        DenseMatrix::from_fn(self.n, self.p(), |i, j| self.columns[j][i])
    }

    /// Keeps the observations at `rows`, in that order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        Self::from_columns(
            self.columns
                .iter()
                .map(|c| rows.iter().map(|&r| c[r]).collect())
                .collect(),
        )
    }

    /// Keeps the variables `cols`, in that order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self {
            n: self.n,
            columns: cols.iter().map(|&j| self.columns[j].clone()).collect(),
        }
    }

    /// Subtracts the column means.
    pub fn centered(&self) -> Self {
        let n = F::of_usize(self.n);
        let columns = self
            .columns
            .iter()
            .map(|c| {
                let mean = c.iter().copied().sum::<F>() / n;
                c.iter().map(|&v| v - mean).collect()
            })
            .collect();
        Self { n: self.n, columns }
    }

    pub fn scaled(&self, factor: F) -> Self {
        Self {
            n: self.n,
            columns: self
                .columns
                .iter()
                .map(|c| c.iter().map(|&v| v * factor).collect())
                .collect(),
        }
    }
}

/// Empirical second-moment matrix `XᵀX / n`, optionally after centering the
/// columns. Divides by `n`, the maximum likelihood normalization.
pub fn empirical_covariance<F: Scalar>(x: &DataMatrix<F>, center: bool) -> DenseMatrix<F> {
    let centered;
    let x = if center {
        centered = x.centered();
        &centered
    } else {
        x
    };
    let p = x.p();
    let n = F::of_usize(x.n());
    let mut c = DenseMatrix::zeros(p, p);
    for a in 0..p {
        for b in 0..=a {
            let v = crate::scalar::dot(x.column(a), x.column(b)) / n;
            c[(a, b)] = v;
            c[(b, a)] = v;
        }
    }
    c
}

/// Modified Cholesky pair `(T, S)` with `Ω = Tᵀ diag(S)⁻¹ T`.
///
/// Row `i` of `T` holds the negated regression coefficients of `X_i` on its
/// predecessors and `S[i]` the conditional variance.
#[derive(Clone, Debug, PartialEq)]
pub struct CholeskyPair<F> {
    t: DenseMatrix<F>,
    s: Vec<F>,
}

impl<F: Scalar> CholeskyPair<F> {
    pub fn new(t: DenseMatrix<F>, s: Vec<F>) -> Result<Self> {
        let p = s.len();
        if t.nrows() != p || t.ncols() != p {
            return Err(Error::SizeMismatch {
                expected: p,
                found: t.nrows(),
            });
        }
        for i in 0..p {
            if t[(i, i)] != F::one() {
                return Err(Error::InvalidInput(format!("T[{i},{i}] is not one")));
            }
            if (i + 1..p).any(|j| t[(i, j)] != F::zero()) {
                return Err(Error::InvalidInput(format!(
                    "row {i} of T is not lower triangular"
                )));
            }
            if !(s[i] > F::zero()) || !s[i].is_finite() {
                return Err(Error::InvalidInput(format!("S[{i}] must be positive")));
            }
        }
        if !t.is_finite() {
            return Err(Error::InvalidInput("T holds a non-finite entry".into()));
        }
        Ok(Self { t, s })
    }

    /// Builds the pair from per-row coefficient vectors (`rows[i]` of length `i`).
    pub fn from_rows(rows: &[Vec<F>], s: Vec<F>) -> Result<Self> {
        let p = s.len();
        if rows.len() != p {
            return Err(Error::SizeMismatch {
                expected: p,
                found: rows.len(),
            });
        }
        let mut t = DenseMatrix::identity(p);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != i {
                return Err(Error::SizeMismatch {
                    expected: i,
                    found: r.len(),
                });
            }
            t.row_mut(i)[..i].copy_from_slice(r);
        }
        Self::new(t, s)
    }

    pub fn identity(p: usize) -> Self {
        Self {
            t: DenseMatrix::identity(p),
            s: vec![F::one(); p],
        }
    }

    pub fn p(&self) -> usize {
        self.s.len()
    }

    pub fn t(&self) -> &DenseMatrix<F> {
        &self.t
    }

    pub fn s(&self) -> &[F] {
        &self.s
    }

    /// First `i` entries of row `i` of `T`.
    pub fn row_coefficients(&self, i: usize) -> &[F] {
        &self.t.row(i)[..i]
    }

    pub fn precision(&self) -> PrecisionMatrix<F> {
        assemble(self)
    }
}

/// Symmetric positive definite precision matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecisionMatrix<F> {
    values: DenseMatrix<F>,
}

impl<F: Scalar> PrecisionMatrix<F> {
    /// Checks symmetry (relative to the largest entry) and positive definiteness.
    pub fn new(values: DenseMatrix<F>) -> Result<Self> {
        if !values.is_square() {
            return Err(Error::SizeMismatch {
                expected: values.nrows(),
                found: values.ncols(),
            });
        }
        if !values.is_finite() {
            return Err(Error::InvalidInput(
                "precision matrix holds a non-finite entry".into(),
            ));
        }
        if values.relative_asymmetry() > F::structural_tolerance() {
            return Err(Error::InvalidInput(
                "precision matrix is not symmetric".into(),
            ));
        }
        Cholesky::new(&values)?;
        Ok(Self { values })
    }

    pub(crate) fn from_trusted(values: DenseMatrix<F>) -> Self {
        Self { values }
    }

    pub fn p(&self) -> usize {
        self.values.nrows()
    }

    pub fn matrix(&self) -> &DenseMatrix<F> {
        &self.values
    }

    pub fn into_matrix(self) -> DenseMatrix<F> {
        self.values
    }

    /// The covariance matrix `Ω⁻¹`.
    pub fn covariance(&self) -> Result<DenseMatrix<F>> {
        Ok(Cholesky::new(&self.values)?.inverse())
    }

    /// Precision matrix of a covariance matrix.
    pub fn from_covariance(sigma: &DenseMatrix<F>) -> Result<Self> {
        Ok(Self {
            values: Cholesky::new(sigma)?.inverse(),
        })
    }

    /// `P Ω Pᵀ` with row `k` of the result taken from variable `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            values: self.values.permute_symmetric(order),
        }
    }
}

/// Modified Cholesky decomposition `Ω = Tᵀ diag(S)⁻¹ T`.
///
/// Runs a `U D Uᵀ` elimination on `Ω` from the last variable backwards, so
/// the covariance is never formed. The pivots are `1 / S[i]`.
pub fn decompose<F: Scalar>(omega: &PrecisionMatrix<F>) -> Result<CholeskyPair<F>> {
    let p = omega.p();
    let mut work = omega.matrix().clone();
    let mut t = DenseMatrix::identity(p);
    let mut s = vec![F::zero(); p];
    for k in (0..p).rev() {
        let pivot = work[(k, k)];
        if !(pivot > F::zero()) || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite {
                index: k,
                pivot: pivot.as_f64(),
            });
        }
        s[k] = F::one() / pivot;
        for j in 0..k {
            t[(k, j)] = work[(j, k)] / pivot;
        }
        for a in 0..k {
            let ua = t[(k, a)];
            if ua == F::zero() {
                continue;
            }
            for b in 0..=a {
                let v = work[(a, b)] - ua * pivot * t[(k, b)];
                work[(a, b)] = v;
                work[(b, a)] = v;
            }
        }
    }
    Ok(CholeskyPair { t, s })
}

/// `Tᵀ diag(S)⁻¹ T`, exactly symmetric.
pub fn assemble<F: Scalar>(pair: &CholeskyPair<F>) -> PrecisionMatrix<F> {
    let p = pair.p();
    let t = &pair.t;
    let mut omega = DenseMatrix::zeros(p, p);
    for k in 0..p {
        let inv = F::one() / pair.s[k];
        let row = t.row(k);
        for a in 0..=k {
            let w = row[a] * inv;
            if w == F::zero() {
                continue;
            }
            for b in 0..=a {
                omega[(a, b)] = omega[(a, b)] + w * row[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            omega[(b, a)] = omega[(a, b)];
        }
    }
    PrecisionMatrix::from_trusted(omega)
}

/// Draws `n` independent observations of `N(0, Ω⁻¹)` by solving `T x = ε`
/// with `ε_i ~ N(0, S[i])`. Deterministic in `seed`.
pub fn sample<F: Scalar>(pair: &CholeskyPair<F>, n: usize, seed: u64) -> Result<DataMatrix<F>> {
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be at least 1".into()));
    }
    let p = pair.p();
    let mut rng = crate::rng::generator(seed);
    let sd: Vec<F> = pair.s.iter().map(|s| s.sqrt()).collect();
    let mut columns = vec![vec![F::zero(); n]; p];
    let mut x = vec![F::zero(); p];
    for obs in 0..n {
        for i in 0..p {
            let z: f64 = StandardNormal.sample(&mut rng);
            let mut v = sd[i] * F::of(z);
            for (j, &tij) in pair.t.row(i)[..i].iter().enumerate() {
                v = v - tij * x[j];
            }
            x[i] = v;
        }
        for i in 0..p {
            columns[i][obs] = x[i];
        }
    }
    DataMatrix::from_columns(columns)
}
