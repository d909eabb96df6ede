//! Householder least squares for the per-row regressions.
//!
//! Row `i` of the Cholesky factor solves `X_i = -Σ_j t[j] X_j + ε`, so the
//! fitted coefficients are the negated least-squares coefficients of `X_i` on
//! the columns of the model.

use super::DataMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Column norm ratio below which a column counts as linearly dependent on the
/// preceding ones.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Least-squares fit of one row on a predecessor subset.
#[derive(Clone, Debug, PartialEq)]
pub struct RowFit<F> {
    /// Predecessor indices, in the order of `coefficients`.
    pub model: Vec<usize>,
    /// `t̂` restricted to `model`, in the Cholesky sign convention.
    pub coefficients: Vec<F>,
    /// `ŝ = ‖X_i + X_m t̂‖² / n`.
    pub residual_variance: F,
}

impl<F: Scalar> RowFit<F> {
    /// Scatters the coefficients into a length-`len` row vector.
    pub fn dense_coefficients(&self, len: usize) -> Vec<F> {
        let mut t = vec![F::zero(); len];
        for (&j, &c) in self.model.iter().zip(&self.coefficients) {
            t[j] = c;
        }
        t
    }
}

/// Householder factorization of `X_order` with the transformed response, from
/// which the fits of every leading prefix of `order` can be read off.
#[derive(Clone, Debug)]
pub struct NestedFits<F> {
    order: Vec<usize>,
    n: usize,
    /// Upper triangle, `r[j]` holds column `j` (entries `0..=j`).
    r: Vec<Vec<F>>,
    qty: Vec<F>,
    /// Residual sums of squares for each prefix length `0..=rank`.
    tail_rss: Vec<F>,
}

impl<F: Scalar> NestedFits<F> {
    /// Factors the columns `order` of `x` (in that order) against target
    /// column `target`. Factorization stops at the first column whose norm
    /// after orthogonalization drops below [`RANK_TOLERANCE`] times the
    /// largest column norm; longer prefixes are then unavailable.
    pub fn new(x: &DataMatrix<F>, target: usize, order: &[usize]) -> Self {
        let n = x.n();
        let k = order.len().min(n);
        let mut cols: Vec<Vec<F>> = order[..k].iter().map(|&j| x.column(j).to_vec()).collect();
        let mut y = x.column(target).to_vec();
        let largest = cols
            .iter()
            .map(|c| c.iter().map(|&v| v * v).sum::<F>().sqrt())
            .fold(F::zero(), F::max);
        let tol = F::of(RANK_TOLERANCE).max(F::epsilon() * F::of(16.0)) * largest;

        let mut r: Vec<Vec<F>> = Vec::with_capacity(k);
        for j in 0..k {
            let (head, tail) = cols.split_at_mut(j + 1);
            let v = &mut head[j];
            let norm = v[j..].iter().map(|&a| a * a).sum::<F>().sqrt();
            if !(norm > tol) {
                break;
            }
            let alpha = if v[j] > F::zero() { -norm } else { norm };
            // v <- x - alpha e_j, stored in place
            v[j] = v[j] - alpha;
            let vnorm2 = v[j..].iter().map(|&a| a * a).sum::<F>();
            let mut rcol: Vec<F> = (0..j).map(|row| v[row]).collect();
            rcol.push(alpha);
            if vnorm2 > F::zero() {
                let beta = F::of(2.0) / vnorm2;
                for c in tail.iter_mut() {
                    let s = beta * v[j..].iter().zip(&c[j..]).map(|(&a, &b)| a * b).sum::<F>();
                    for (cv, &hv) in c[j..].iter_mut().zip(&v[j..]) {
                        *cv = *cv - s * hv;
                    }
                }
                let s = beta * v[j..].iter().zip(&y[j..]).map(|(&a, &b)| a * b).sum::<F>();
                for (yv, &hv) in y[j..].iter_mut().zip(&v[j..]) {
                    *yv = *yv - s * hv;
                }
            }
            r.push(rcol);
        }

        let rank = r.len();
        let mut tail_rss = vec![F::zero(); rank + 1];
        let mut acc: F = y[rank..].iter().map(|&a| a * a).sum();
        tail_rss[rank] = acc;
        for j in (0..rank).rev() {
            acc = acc + y[j] * y[j];
            tail_rss[j] = acc;
        }
        Self {
            order: order.to_vec(),
            n,
            r,
            qty: y,
            tail_rss,
        }
    }

    /// Number of leading prefixes (beyond the empty one) that are full rank.
    pub fn rank(&self) -> usize {
        self.r.len()
    }

    /// `ŝ` for the prefix of length `len`.
    pub fn residual_variance(&self, len: usize) -> Option<F> {
        self.tail_rss.get(len).map(|&rss| rss / F::of_usize(self.n))
    }

    /// Full fit for the prefix of length `len`, if it is full rank.
    pub fn fit(&self, len: usize) -> Option<RowFit<F>> {
        if len > self.rank() {
            return None;
        }
        let mut beta = self.qty[..len].to_vec();
        for i in (0..len).rev() {
            let mut s = beta[i];
            for k in i + 1..len {
                s = s - self.r[k][i] * beta[k];
            }
            beta[i] = s / self.r[i][i];
        }
        let mut pairs: Vec<(usize, F)> = self.order[..len]
            .iter()
            .copied()
            .zip(beta.into_iter().map(|b| -b))
            .collect();
        pairs.sort_by_key(|&(j, _)| j);
        Some(RowFit {
            model: pairs.iter().map(|&(j, _)| j).collect(),
            coefficients: pairs.iter().map(|&(_, c)| c).collect(),
            residual_variance: self.residual_variance(len)?,
        })
    }
}

/// Least-squares fit of column `row` on the columns `model`.
///
/// `model` must be sorted, duplicate free, with every index below `row`, and
/// hold at most `n - 2` indices.
pub fn fit_row<F: Scalar>(x: &DataMatrix<F>, row: usize, model: &[usize]) -> Result<RowFit<F>> {
    if row >= x.p() {
        return Err(Error::InvalidInput(format!(
            "row {row} out of range for p = {}",
            x.p()
        )));
    }
    validate_model(row, model)?;
    let limit = x.n().saturating_sub(2);
    if model.len() > limit {
        return Err(Error::DimensionTooLarge {
            dim: model.len(),
            limit,
        });
    }
    let nested = NestedFits::new(x, row, model);
    if nested.rank() < model.len() {
        return Err(Error::RankDeficient {
            column: model[nested.rank()],
        });
    }
    Ok(nested.fit(model.len()).expect("full rank prefix"))
}

pub(crate) fn validate_model(row: usize, model: &[usize]) -> Result<()> {
    for w in model.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::InvalidInput(format!(
                "model {model:?} is not strictly increasing"
            )));
        }
    }
    if let Some(&last) = model.last() {
        if last >= row {
            return Err(Error::InvalidInput(format!(
                "model {model:?} holds an index that does not precede row {row}"
            )));
        }
    }
    Ok(())
}
