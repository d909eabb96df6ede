//! Reference estimators: linear shrinkage towards a scaled identity, and the
//! constant-width banded Cholesky fit with a band chosen on random splits.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::ModelGraph;
use crate::linalg::{
    empirical_covariance, fit_row, CholeskyPair, DataMatrix, DenseMatrix, NestedFits,
    PrecisionMatrix,
};
use crate::rng::{generator, substream};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct LedoitWolf<F> {
    pub covariance: DenseMatrix<F>,
    /// Weight `ρ ∈ [0, 1]` of the target.
    pub shrinkage: F,
    /// `μ = tr(S)/p`, the scale of the target `μI`.
    pub target_scale: F,
}

/// Ledoit–Wolf (2004) shrinkage `Σ̂ = (1 - ρ) S + ρ μ I`.
///
/// With `S = XᵀX/n`, `μ = tr(S)/p`, `δ² = ‖S - μI‖²/p` and
/// `β̄² = Σ_k ‖x_k x_kᵀ - S‖² / (n² p)` over the observations `x_k`, the
/// intensity is `ρ = min(β̄², δ²) / δ²`, and `0` when `δ² = 0`.
pub fn ledoit_wolf<F: Scalar>(x: &DataMatrix<F>, center: bool) -> Result<LedoitWolf<F>> {
    let n = x.n();
    if n < 2 {
        return Err(Error::InvalidInput(
            "shrinkage needs at least two observations".into(),
        ));
    }
    let p = x.p();
    let s = empirical_covariance(x, center);
    let xs = if center { x.centered() } else { x.clone() };
    let pf = p as f64;
    let mu = s.trace().as_f64() / pf;
    let s_norm2: f64 = s.as_slice().iter().map(|v| v.as_f64().powi(2)).sum();
    let delta2 = (s_norm2 - 2.0 * mu * s.trace().as_f64() + mu * mu * pf) / pf;
    // Σ_k ‖x_k x_kᵀ - S‖² = Σ_k ‖x_k‖⁴ - n ‖S‖²
    let fourth: f64 = (0..n)
        .map(|k| {
            let r2: f64 = xs.columns().iter().map(|c| c[k].as_f64().powi(2)).sum();
            r2 * r2
        })
        .sum();
    let beta_bar2 = ((fourth - n as f64 * s_norm2) / (n as f64 * n as f64) / pf).max(0.0);
    let rho = if delta2 > 0.0 {
        beta_bar2.min(delta2) / delta2
    } else {
        0.0
    };
    let rho = rho.clamp(0.0, 1.0);
    let (rf, muf) = (F::of(rho), F::of(mu));
    let covariance = DenseMatrix::from_fn(p, p, |i, j| {
        let target = if i == j { muf } else { F::zero() };
        (F::one() - rf) * s[(i, j)] + rf * target
    });
    Ok(LedoitWolf {
        covariance,
        shrinkage: rf,
        target_scale: muf,
    })
}

/// Selected band width and the validation score of every candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedChoice {
    pub k: usize,
    /// `(k, mean held-out negative log-likelihood per observation)`.
    pub split_scores: Vec<(usize, f64)>,
}

#[derive(Clone, Debug)]
pub struct BandedFit<F> {
    pub precision: PrecisionMatrix<F>,
    pub pair: CholeskyPair<F>,
    pub graph: ModelGraph,
    pub choice: BandedChoice,
}

/// Share of the observations used for fitting in each split.
pub const TRAIN_FRACTION: f64 = 2.0 / 3.0;

/// The `k`-banded model: row `i` regresses on its `min(k, i)` nearest
/// predecessors.
pub fn band_model(row: usize, k: usize) -> Vec<usize> {
    (row - k.min(row)..row).collect()
}

/// Banded Cholesky estimator with `k ∈ {0, …, kmax}` chosen by the mean
/// held-out Gaussian negative log-likelihood over `splits` random splits,
/// then refitted on all the data.
pub fn banded_estimator<F: Scalar>(
    x: &DataMatrix<F>,
    kmax: usize,
    splits: usize,
    seed: u64,
) -> Result<BandedFit<F>> {
    let n = x.n();
    if kmax > n / 2 {
        return Err(Error::DimensionTooLarge {
            dim: kmax,
            limit: n / 2,
        });
    }
    if splits == 0 {
        return Err(Error::Config("at least one split is needed".into()));
    }
    let n_train = ((n as f64) * TRAIN_FRACTION).round() as usize;
    if n_train < kmax + 2 || n_train >= n {
        return Err(Error::InvalidInput(format!(
            "{n} observations cannot be split for bands up to {kmax}"
        )));
    }
    let per_split: Vec<Vec<f64>> = (0..splits)
        .into_par_iter()
        .map(|split| {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut generator(substream(seed, split as u64, 0)));
            let train = x.select_rows(&idx[..n_train])?;
            let test = x.select_rows(&idx[n_train..])?;
            Ok(split_scores(&train, &test, kmax))
        })
        .collect::<Result<_>>()?;
    let split_scores: Vec<(usize, f64)> = (0..=kmax)
        .map(|k| {
            (
                k,
                per_split.iter().map(|s| s[k]).sum::<f64>() / splits as f64,
            )
        })
        .collect();
    let mut best = 0;
    for &(k, score) in &split_scores {
        if score < split_scores[best].1 {
            best = k;
        }
    }

    let mut rows = Vec::with_capacity(x.p());
    let mut s = Vec::with_capacity(x.p());
    let mut models = Vec::with_capacity(x.p());
    for row in 0..x.p() {
        let model = band_model(row, best);
        let fit = fit_row(x, row, &model).map_err(|e| e.at_row(row))?;
        rows.push(fit.dense_coefficients(row));
        s.push(fit.residual_variance);
        models.push(model);
    }
    let pair = CholeskyPair::from_rows(&rows, s)?;
    Ok(BandedFit {
        precision: pair.precision(),
        graph: ModelGraph::new(models)?,
        pair,
        choice: BandedChoice {
            k: best,
            split_scores,
        },
    })
}

/// Held-out score of every band width; `+∞` where a fit is degenerate.
fn split_scores<F: Scalar>(train: &DataMatrix<F>, test: &DataMatrix<F>, kmax: usize) -> Vec<f64> {
    let p = train.p();
    let mut scores = vec![0.0; kmax + 1];
    for row in 0..p {
        let order: Vec<usize> = (0..kmax.min(row)).map(|j| row - 1 - j).collect();
        let nested = NestedFits::new(train, row, &order);
        for (k, score) in scores.iter_mut().enumerate() {
            *score += match nested.fit(k.min(row)) {
                Some(fit) if fit.residual_variance > F::zero() => row_nll(
                    test,
                    row,
                    &fit.model,
                    &fit.coefficients,
                    fit.residual_variance.as_f64(),
                ),
                _ => f64::INFINITY,
            };
        }
    }
    scores
}

/// Mean over test observations of `½[log(2π s) + (x_i + Σ t_j x_j)² / s]`.
fn row_nll<F: Scalar>(test: &DataMatrix<F>, row: usize, model: &[usize], t: &[F], s: f64) -> f64 {
    let target = test.column(row);
    let mut total = 0.0;
    for obs in 0..test.n() {
        let mut e = target[obs].as_f64();
        for (&j, &c) in model.iter().zip(t) {
            e += c.as_f64() * test.column(j)[obs].as_f64();
        }
        total += e * e / s;
    }
    0.5 * ((2.0 * std::f64::consts::PI * s).ln() + total / test.n() as f64)
}
