//! LARS with the Lasso modification, run on the Gram matrix of the centered
//! predictors.
//!
//! The path solves `min ½‖y - Xβ‖² + λ‖β‖₁` for every `λ`; knots are the
//! values of `λ` where a variable enters or leaves the active set.

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, DataMatrix, DenseMatrix};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LarsAction {
    Enter,
    Leave,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LarsEvent {
    pub step: usize,
    /// Column of the predictor matrix.
    pub variable: usize,
    pub action: LarsAction,
    /// `λ` at which the event happens.
    pub knot: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LarsOptions {
    /// Largest active set; the path stops before a variable would enter
    /// beyond it. Capped at `min(n - 1, #columns)`.
    pub max_active: usize,
    /// Scale the centered columns to unit norm. Coefficients are always
    /// reported on the original scale.
    pub standardize: bool,
}

impl LarsOptions {
    pub fn new(max_active: usize) -> Self {
        Self {
            max_active,
            standardize: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LarsPath {
    pub events: Vec<LarsEvent>,
    /// Active set after each event, ascending.
    pub active_sets: Vec<Vec<usize>>,
    /// Solution at each event's knot, one entry per column.
    pub coefficients: Vec<Vec<f64>>,
    /// Solution at `λ = 0` when the path gets there.
    pub terminal: Option<Vec<f64>>,
    /// Columns left out: constant after centering, or collinear with the
    /// active set when they tried to enter.
    pub dropped_columns: Vec<usize>,
    pub n_columns: usize,
}

impl LarsPath {
    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Variables in the order they first entered.
    pub fn first_entrance(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n_columns];
        let mut order = Vec::new();
        for e in &self.events {
            if e.action == LarsAction::Enter && !seen[e.variable] {
                seen[e.variable] = true;
                order.push(e.variable);
            }
        }
        order
    }

    pub fn knots(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.knot).collect()
    }

    /// Solution at `lambda` by interpolation between knots, `None` beyond the
    /// computed part of the path.
    pub fn coefficients_at(&self, lambda: f64) -> Option<Vec<f64>> {
        let first = self.events.first()?;
        if lambda >= first.knot {
            return Some(vec![0.0; self.n_columns]);
        }
        let mut points: Vec<(f64, &[f64])> = self
            .events
            .iter()
            .zip(&self.coefficients)
            .map(|(e, c)| (e.knot, c.as_slice()))
            .collect();
        if let Some(t) = &self.terminal {
            points.push((0.0, t));
        }
        for w in points.windows(2) {
            let ((hi, a), (lo, b)) = (w[0], w[1]);
            if lambda <= hi && lambda >= lo {
                if hi == lo {
                    return Some(b.to_vec());
                }
                let f = (hi - lambda) / (hi - lo);
                return Some(a.iter().zip(b).map(|(&u, &v)| u + f * (v - u)).collect());
            }
        }
        None
    }
}

/// Relative size under which a centered column counts as constant.
const ZERO_COLUMN: f64 = 1e-12;
/// Squared pivot, relative to the diagonal, under which an entering column is
/// considered collinear with the active set.
const COLLINEAR: f64 = 1e-10;

/// Lasso regularization path of `y` on the columns of `x`. Both are centered
/// first, so no intercept is fitted.
pub fn lars_path<F: Scalar>(x: &DataMatrix<F>, y: &[F], options: &LarsOptions) -> Result<LarsPath> {
    let n = x.n();
    if y.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "response holds a non-finite entry".into(),
        ));
    }
    let q = x.p();
    let xc: Vec<Vec<f64>> = x
        .centered()
        .columns()
        .iter()
        .map(|c| c.iter().map(|v| v.as_f64()).collect())
        .collect();
    let y_mean = y.iter().map(|v| v.as_f64()).sum::<f64>() / n as f64;
    let yc: Vec<f64> = y.iter().map(|v| v.as_f64() - y_mean).collect();

    let norms: Vec<f64> = xc.iter().map(|c| crate::scalar::dot(c, c).sqrt()).collect();
    let largest = norms.iter().copied().fold(0.0, f64::max);
    let mut excluded: Vec<bool> = norms
        .iter()
        .map(|&v| !(v > ZERO_COLUMN * largest) || v == 0.0)
        .collect();
    let scale: Vec<f64> = norms
        .iter()
        .zip(&excluded)
        .map(|(&v, &ex)| {
            if options.standardize && !ex {
                1.0 / v
            } else {
                1.0
            }
        })
        .collect();

    let mut gram = vec![vec![0.0; q]; q];
    for a in 0..q {
        for b in 0..=a {
            let v = crate::scalar::dot(&xc[a], &xc[b]) * scale[a] * scale[b];
            gram[a][b] = v;
            gram[b][a] = v;
        }
    }
    let xty: Vec<f64> = (0..q)
        .map(|j| crate::scalar::dot(&xc[j], &yc) * scale[j])
        .collect();

    // Cauchy–Schwarz bound on every correlation; λ below a tiny fraction of
    // it is rounding noise
    let largest_scaled = if options.standardize { 1.0 } else { largest };
    let floor = 1e-13 * crate::scalar::dot(&yc, &yc).sqrt() * largest_scaled;
    let max_active = options.max_active.min(n.saturating_sub(1)).min(q);
    let mut path = run(&gram, &xty, &mut excluded, max_active, floor);
    for c in path.coefficients.iter_mut().chain(path.terminal.iter_mut()) {
        for (b, s) in c.iter_mut().zip(&scale) {
            *b *= s;
        }
    }
    path.dropped_columns = (0..q).filter(|&j| excluded[j]).collect();
    Ok(path)
}

fn run(
    gram: &[Vec<f64>],
    xty: &[f64],
    excluded: &mut [bool],
    max_active: usize,
    floor: f64,
) -> LarsPath {
    let q = xty.len();
    let mut path = LarsPath {
        events: Vec::new(),
        active_sets: Vec::new(),
        coefficients: Vec::new(),
        terminal: None,
        dropped_columns: Vec::new(),
        n_columns: q,
    };
    let mut beta = vec![0.0; q];
    let mut active: Vec<usize> = Vec::new();
    let mut is_active = vec![false; q];

    let correlations = |beta: &[f64], active: &[usize]| -> Vec<f64> {
        (0..q)
            .map(|j| xty[j] - active.iter().map(|&k| gram[j][k] * beta[k]).sum::<f64>())
            .collect()
    };

    let mut c = correlations(&beta, &active);
    let Some(first) = argmax_abs(&c, |j| !excluded[j]) else {
        return path;
    };
    let mut lambda = c[first].abs();
    if !(lambda > floor) || max_active == 0 {
        return path;
    }
    let mut entering = Some(first);
    let mut just_left: Option<usize> = None;

    loop {
        if let Some(j) = entering.take() {
            if active.len() == max_active {
                break;
            }
            if collinear(gram, &active, j) {
                excluded[j] = true;
            } else {
                active.push(j);
                is_active[j] = true;
                record(&mut path, j, LarsAction::Enter, lambda, &active, &beta);
            }
        }

        let signs: Vec<f64> = active.iter().map(|&k| c[k].signum()).collect();
        let g_aa = DenseMatrix::from_fn(active.len(), active.len(), |a, b| {
            gram[active[a]][active[b]]
        });
        let direction = match Cholesky::new(&g_aa) {
            Ok(ch) => ch.solve(&signs),
            Err(_) => {
                // numerically singular despite the entry check: drop the newest
                let j = active.pop().expect("non-empty active set");
                is_active[j] = false;
                beta[j] = 0.0;
                excluded[j] = true;
                c = correlations(&beta, &active);
                continue;
            }
        };
        let a: Vec<f64> = (0..q)
            .map(|j| {
                active
                    .iter()
                    .zip(&direction)
                    .map(|(&k, &d)| gram[j][k] * d)
                    .sum::<f64>()
            })
            .collect();

        let tiny = 1e-12 * lambda;
        let mut step = lambda;
        let mut event: Option<(usize, LarsAction)> = None;
        for (pos, &k) in active.iter().enumerate() {
            let d = direction[pos];
            if d != 0.0 && beta[k] != 0.0 {
                let g = -beta[k] / d;
                if g > tiny && g < step {
                    step = g;
                    event = Some((k, LarsAction::Leave));
                }
            }
        }
        for j in 0..q {
            if is_active[j] || excluded[j] {
                continue;
            }
            let upper = (lambda - c[j]) / (1.0 - a[j]);
            let lower = (lambda + c[j]) / (1.0 + a[j]);
            // a variable that just left sits on its old boundary; only the
            // opposite one is a genuine re-entry
            let candidates = match just_left {
                Some(k) if k == j => {
                    if c[j] < 0.0 {
                        [upper, f64::INFINITY]
                    } else {
                        [lower, f64::INFINITY]
                    }
                }
                _ => [upper, lower],
            };
            for g in candidates {
                if g.is_finite() && g > tiny && g < step {
                    step = g;
                    event = Some((j, LarsAction::Enter));
                }
            }
        }

        if let Some((_, LarsAction::Enter)) = event {
            if active.len() == max_active {
                break;
            }
        }
        for (pos, &k) in active.iter().enumerate() {
            beta[k] += step * direction[pos];
        }
        lambda -= step;
        just_left = None;
        match event {
            None => {
                path.terminal = Some(beta.clone());
                break;
            }
            Some((j, LarsAction::Enter)) => {
                c = correlations(&beta, &active);
                entering = Some(j);
            }
            Some((j, LarsAction::Leave)) => {
                beta[j] = 0.0;
                active.retain(|&k| k != j);
                is_active[j] = false;
                just_left = Some(j);
                c = correlations(&beta, &active);
                record(&mut path, j, LarsAction::Leave, lambda, &active, &beta);
            }
        }
        if !(lambda > floor) {
            path.terminal = Some(beta.clone());
            break;
        }
    }
    path
}

fn record(
    path: &mut LarsPath,
    variable: usize,
    action: LarsAction,
    knot: f64,
    active: &[usize],
    beta: &[f64],
) {
    let mut set = active.to_vec();
    set.sort_unstable();
    path.events.push(LarsEvent {
        step: path.events.len(),
        variable,
        action,
        knot,
    });
    path.active_sets.push(set);
    path.coefficients.push(beta.to_vec());
}

/// First index attaining the largest `|c_j|` among allowed columns.
fn argmax_abs(c: &[f64], allowed: impl Fn(usize) -> bool) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (j, v) in c.iter().enumerate() {
        if allowed(j) && best.is_none_or(|b| v.abs() > c[b].abs()) {
            best = Some(j);
        }
    }
    best
}

fn collinear(gram: &[Vec<f64>], active: &[usize], j: usize) -> bool {
    let mut idx = active.to_vec();
    idx.push(j);
    let g = DenseMatrix::from_fn(idx.len(), idx.len(), |a, b| gram[idx[a]][idx[b]]);
    match Cholesky::new(&g) {
        Ok(ch) => {
            let last = idx.len() - 1;
            let pivot = ch.lower()[(last, last)];
            !(pivot * pivot > COLLINEAR * gram[j][j])
        }
        Err(_) => true,
    }
}
