//! Gaussian losses and the exact variance term of the per-row maximum
//! likelihood estimator.

use statrs::function::gamma::digamma;

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigenvalues, Cholesky, DenseMatrix, PrecisionMatrix};
use crate::scalar::Scalar;

/// Losses of an estimate `Ω̂` against the truth `Ω`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossReport<F> {
    pub kullback: F,
    /// `‖Ω̂ - Ω‖`
    pub operator_precision: F,
    /// `‖Ω̂⁻¹ - Σ‖`
    pub operator_covariance: F,
    /// `‖Ω̂ - Ω‖_F`
    pub frobenius_precision: F,
}

/// Kullback divergence between `N(0, Ω⁻¹)` and `N(0, Ω̂⁻¹)`:
/// `½[tr(Ω̂Ω⁻¹) - log det(Ω̂Ω⁻¹) - p]`.
///
/// Evaluated on the congruent matrix `L⁻¹ Ω̂ L⁻ᵀ` where `Ω = L Lᵀ`, which has
/// the eigenvalues of `Ω̂Ω⁻¹` and is symmetric.
pub fn kullback<F: Scalar>(omega: &PrecisionMatrix<F>, estimate: &PrecisionMatrix<F>) -> Result<F> {
    if omega.p() != estimate.p() {
        return Err(Error::SizeMismatch {
            expected: omega.p(),
            found: estimate.p(),
        });
    }
    let whitened = Cholesky::new(omega.matrix())?.whiten(estimate.matrix());
    let log_det = Cholesky::new(&whitened)?.log_det();
    let half = F::of(0.5);
    let value = half * (whitened.trace() - log_det - F::of_usize(omega.p()));
    Ok(value.max(F::zero()))
}

/// Prediction contrast `(t - t') Σ_head (t - t')ᵀ`.
pub fn contrast<F: Scalar>(t: &[F], t_other: &[F], sigma_head: &DenseMatrix<F>) -> F {
    let diff: Vec<F> = t.iter().zip(t_other).map(|(&a, &b)| a - b).collect();
    let mut total = F::zero();
    for (a, &da) in diff.iter().enumerate() {
        if da == F::zero() {
            continue;
        }
        let row = sigma_head.row(a);
        let s: F = diff.iter().zip(row).map(|(&db, &sab)| db * sab).sum();
        total = total + da * s;
    }
    total.max(F::zero())
}

/// Conditional Kullback divergence of `X_i | X_{<i}` between parameters
/// `(t, s)` (truth) and `(t', s')`:
/// `½[log(s'/s) + s/s' - 1 + l(t, t')/s']`.
pub fn conditional_kullback<F: Scalar>(
    t: &[F],
    s: F,
    t_other: &[F],
    s_other: F,
    sigma_head: &DenseMatrix<F>,
) -> F {
    let ratio = s / s_other;
    let value =
        F::of(0.5) * (-ratio.ln() + ratio - F::one() + contrast(t, t_other, sigma_head) / s_other);
    value.max(F::zero())
}

/// `Ψ(k) = E[log(χ²_k / k)] = digamma(k/2) + log 2 - log k`.
pub fn psi(k: f64) -> f64 {
    digamma(k / 2.0) + std::f64::consts::LN_2 - k.ln()
}

/// Exact Kullback variance term `R_{n,d}` of the maximum likelihood fit of
/// one row with a `d`-dimensional model from `n` observations.
pub fn risk_term(n: usize, d: usize) -> Result<f64> {
    if n < 3 || d > n - 3 {
        return Err(Error::DimensionTooLarge {
            dim: d,
            limit: n.saturating_sub(3),
        });
    }
    let (n, d) = (n as f64, d as f64);
    let a = n - d - 2.0;
    Ok((d + 1.0) / a
        + d * (d + 1.0) / (2.0 * (n - d - 1.0) * a)
        + 0.5 * (psi(n - d) + (1.0 - d / n).ln()))
}

/// Largest singular value.
pub fn operator_norm<F: Scalar>(a: &DenseMatrix<F>) -> F {
    if a.nrows() == 0 || a.ncols() == 0 {
        return F::zero();
    }
    if a.is_square() && a.relative_asymmetry() == F::zero() {
        let eig = symmetric_eigenvalues(a);
        return eig[0].abs().max(eig[eig.len() - 1].abs());
    }
    let gram = if a.nrows() >= a.ncols() {
        a.transpose().matmul(a)
    } else {
        a.matmul(&a.transpose())
    };
    let eig = symmetric_eigenvalues(&gram);
    eig[eig.len() - 1].max(F::zero()).sqrt()
}

pub fn frobenius_norm<F: Scalar>(a: &DenseMatrix<F>) -> F {
    a.as_slice().iter().map(|&x| x * x).sum::<F>().sqrt()
}

/// Kullback, both operator distances and the Frobenius distance.
pub fn loss_report<F: Scalar>(
    omega: &PrecisionMatrix<F>,
    estimate: &PrecisionMatrix<F>,
) -> Result<LossReport<F>> {
    let sigma = omega.covariance()?;
    let sigma_hat = estimate.covariance()?;
    let diff = estimate.matrix().sub(omega.matrix());
    Ok(LossReport {
        kullback: kullback(omega, estimate)?,
        operator_precision: operator_norm(&diff),
        operator_covariance: operator_norm(&sigma_hat.sub(&sigma)),
        frobenius_precision: frobenius_norm(&diff),
    })
}

/// Population projection of row `row` onto the predecessor subset `model`:
/// the best linear predictor coefficients (Cholesky sign convention, full
/// length `row`) and the residual variance, computed from the covariance.
pub fn project_row<F: Scalar>(
    sigma: &DenseMatrix<F>,
    row: usize,
    model: &[usize],
) -> Result<(Vec<F>, F)> {
    let mut t = vec![F::zero(); row];
    if model.is_empty() {
        return Ok((t, sigma[(row, row)]));
    }
    let gram = sigma.select(model, model);
    let cross: Vec<F> = model.iter().map(|&j| sigma[(j, row)]).collect();
    let beta = Cholesky::new(&gram)?.solve(&cross);
    let explained: F = beta.iter().zip(&cross).map(|(&b, &c)| b * c).sum();
    for (&j, &b) in model.iter().zip(&beta) {
        t[j] = -b;
    }
    Ok((t, sigma[(row, row)] - explained))
}
