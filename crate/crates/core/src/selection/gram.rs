//! Criterion evaluation from the Gram matrix `C = XᵀX / n`.
//!
//! A stack of predecessor indices carries the Cholesky factor of `C[m, m]`
//! and `z = L⁻¹ C[m, i]`, so pushing one index costs `O(|m|²)` and
//! `ŝ_{i,m} = C[i,i] - ‖z‖²`. Complete collections are scanned depth first,
//! explicit lists are sorted so neighbours share prefixes. Every route builds
//! a given model by pushing its indices in the same order, so the criterion
//! of a model does not depend on the collection it was found in.

use crate::linalg::DataMatrix;
use crate::scalar::Scalar;

/// Squared pivot, relative to the diagonal entry, under which a column is
/// treated as a linear combination of the ones already on the stack.
pub(crate) const PIVOT_TOLERANCE: f64 = 1e3 * f64::EPSILON;

/// `ŝ` at or below this fraction of `C[i,i]` is indistinguishable from an
/// exact fit after the cancellation in `C[i,i] - ‖z‖²`.
pub(crate) const ZERO_FIT_TOLERANCE: f64 = 64.0 * f64::EPSILON;

/// `XᵀX / n` in double precision.
#[derive(Clone, Debug)]
pub(crate) struct Gram {
    p: usize,
    values: Vec<f64>,
}

impl Gram {
    pub(crate) fn new<F: Scalar>(x: &DataMatrix<F>) -> Self {
        let p = x.p();
        let n = x.n() as f64;
        let cols: Vec<Vec<f64>> = x
            .columns()
            .iter()
            .map(|c| c.iter().map(|v| v.as_f64()).collect())
            .collect();
        let mut values = vec![0.0; p * p];
        for a in 0..p {
            for b in 0..=a {
                let v = crate::scalar::dot(&cols[a], &cols[b]) / n;
                values[a * p + b] = v;
                values[b * p + a] = v;
            }
        }
        Self { p, values }
    }

    #[inline]
    fn at(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.p + b]
    }
}

/// Outcome of pushing one index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Push {
    /// New residual variance, strictly positive.
    Fit(f64),
    /// The new set fits the target exactly; the index was pushed.
    ZeroResidual,
    /// The column is dependent on the stack; nothing was pushed.
    Dependent,
}

pub(crate) struct PrefixStack<'a> {
    gram: &'a Gram,
    target: usize,
    members: Vec<usize>,
    /// Row `k` of the Cholesky factor of `C[m, m]`, entries `0..=k`.
    lower: Vec<Vec<f64>>,
    z: Vec<f64>,
    /// `rss[k]` is `ŝ` with the first `k` members.
    rss: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> PrefixStack<'a> {
    pub(crate) fn new(gram: &'a Gram, target: usize) -> Self {
        Self {
            gram,
            target,
            members: Vec::new(),
            lower: Vec::new(),
            z: Vec::new(),
            rss: vec![gram.at(target, target)],
            scratch: Vec::new(),
        }
    }

    pub(crate) fn members(&self) -> &[usize] {
        &self.members
    }

    pub(crate) fn len(&self) -> usize {
        self.members.len()
    }

    /// `ŝ` of the current stack, `None` when it is an exact fit.
    pub(crate) fn residual_variance(&self) -> Option<f64> {
        let s = self.rss[self.members.len()];
        (s > ZERO_FIT_TOLERANCE * self.gram.at(self.target, self.target)).then_some(s)
    }

    pub(crate) fn truncate(&mut self, len: usize) {
        self.members.truncate(len);
        self.lower.truncate(len);
        self.z.truncate(len);
        self.rss.truncate(len + 1);
    }

    pub(crate) fn pop(&mut self) {
        let len = self.members.len();
        self.truncate(len.saturating_sub(1));
    }

    pub(crate) fn push(&mut self, j: usize) -> Push {
        let g = self.gram;
        let k = self.members.len();
        let l = &mut self.scratch;
        l.clear();
        for a in 0..k {
            let row = &self.lower[a];
            let mut v = g.at(self.members[a], j);
            for b in 0..a {
                v -= row[b] * l[b];
            }
            l.push(v / row[a]);
        }
        let cjj = g.at(j, j);
        let pivot2 = cjj - l.iter().map(|v| v * v).sum::<f64>();
        if !(pivot2 > PIVOT_TOLERANCE * cjj) {
            return Push::Dependent;
        }
        let pivot = pivot2.sqrt();
        let zj =
            (g.at(j, self.target) - l.iter().zip(&self.z).map(|(a, b)| a * b).sum::<f64>()) / pivot;
        let mut row = std::mem::take(l);
        row.push(pivot);
        self.lower.push(row);
        self.z.push(zj);
        self.members.push(j);
        let s = self.rss[k] - zj * zj;
        self.rss.push(s);
        match self.residual_variance() {
            Some(s) => Push::Fit(s),
            None => Push::ZeroResidual,
        }
    }
}
