use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Prior weights `l_m = -log π(m) / |m|` for the prior-based penalty, keyed by
/// `(row, model)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PriorWeights {
    weights: BTreeMap<(usize, Vec<usize>), f64>,
    fallback: Option<f64>,
}

impl PriorWeights {
    pub fn new() -> Self {
        Self::default()
    }

    /// Weight used for any non-empty model without an explicit entry.
    pub fn with_fallback(mut self, l: f64) -> Self {
        self.fallback = Some(l);
        self
    }

    pub fn insert(&mut self, row: usize, model: Vec<usize>, l: f64) -> Result<()> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::Config(format!(
                "prior weight for {model:?} must be positive, got {l}"
            )));
        }
        self.weights.insert((row, model), l);
        Ok(())
    }

    /// Sets the weight from a prior probability, `l = -log(π) / |m|`.
    pub fn insert_probability(
        &mut self,
        row: usize,
        model: Vec<usize>,
        probability: f64,
    ) -> Result<()> {
        if model.is_empty() {
            return Ok(());
        }
        if !(probability > 0.0 && probability < 1.0) {
            return Err(Error::Config(format!(
                "prior probability {probability} outside (0, 1)"
            )));
        }
        let l = -probability.ln() / model.len() as f64;
        self.insert(row, model, l)
    }

    /// `l` for a model; the empty model always has weight one.
    pub fn weight(&self, row: usize, model: &[usize]) -> Result<f64> {
        if model.is_empty() {
            return Ok(1.0);
        }
        self.weights
            .get(&(row, model.to_vec()))
            .copied()
            .or(self.fallback)
            .ok_or_else(|| Error::MissingPriorWeight {
                row,
                model: model.to_vec(),
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PenaltyKind {
    /// `K |m| / (n - |m|)`, for nested (banding) collections.
    Ordered,
    /// `log[1 + K |m|/(n - |m|) {1 + sqrt(2[1 + log(q/|m|)])}²]` with `q` the
    /// number of predecessors. `floor_at_n` replaces `q` by `max(q, n)`.
    Complete { floor_at_n: bool },
    /// `K |m|/(n - |m|) (1 + sqrt(2 l_m))²`.
    Prior(PriorWeights),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PenaltySpec {
    pub kind: PenaltyKind,
    pub k: f64,
}

impl PenaltySpec {
    pub fn ordered(k: f64) -> Result<Self> {
        Self::new(PenaltyKind::Ordered, k)
    }

    pub fn complete(k: f64) -> Result<Self> {
        Self::new(PenaltyKind::Complete { floor_at_n: false }, k)
    }

    pub fn prior(k: f64, weights: PriorWeights) -> Result<Self> {
        Self::new(PenaltyKind::Prior(weights), k)
    }

    pub fn new(kind: PenaltyKind, k: f64) -> Result<Self> {
        if !(k > 1.0) || !k.is_finite() {
            return Err(Error::Config(format!(
                "penalty constant K must exceed 1, got {k}"
            )));
        }
        Ok(Self { kind, k })
    }

    /// Whether the value only depends on the model size.
    pub fn is_size_based(&self) -> bool {
        !matches!(self.kind, PenaltyKind::Prior(_))
    }

    /// Penalty of `model` for row `row` (0-based, so `row` predecessors) from
    /// `n` observations.
    pub fn value(&self, n: usize, row: usize, model: &[usize]) -> Result<f64> {
        let size = model.len();
        check_size(n, row, size)?;
        if size == 0 {
            return Ok(0.0);
        }
        let ratio = size as f64 / (n - size) as f64;
        Ok(match &self.kind {
            PenaltyKind::Ordered => self.k * ratio,
            PenaltyKind::Complete { floor_at_n } => {
                let q = if *floor_at_n { row.max(n) } else { row } as f64;
                let h = 1.0 + (2.0 * (1.0 + (q / size as f64).ln())).sqrt();
                (1.0 + self.k * ratio * h * h).ln()
            }
            PenaltyKind::Prior(w) => {
                let l = w.weight(row, model)?;
                let h = 1.0 + (2.0 * l).sqrt();
                self.k * ratio * h * h
            }
        })
    }

    /// Penalty by model size; fails for prior penalties.
    pub fn for_size(&self, n: usize, row: usize, size: usize) -> Result<f64> {
        if !self.is_size_based() && size > 0 {
            return Err(Error::Config(
                "prior penalties depend on the model, not only its size".into(),
            ));
        }
        let model: Vec<usize> = (0..size).collect();
        self.value(n, row, &model)
    }
}

fn check_size(n: usize, row: usize, size: usize) -> Result<()> {
    let limit = n.saturating_sub(2);
    if size > limit {
        return Err(Error::DimensionTooLarge { dim: size, limit });
    }
    if size > row {
        return Err(Error::DimensionTooLarge {
            dim: size,
            limit: row,
        });
    }
    Ok(())
}

/// `η(K) = max([1 - 2(3/(K+2))^{1/6}]₊², [1 - (3/(K+2))^{1/6}]²/4)`.
///
/// The first branch takes the positive part, which keeps `η` increasing in
/// `K` towards one.
pub fn eta_bound(k: f64) -> f64 {
    let x = (3.0 / (k + 2.0)).powf(1.0 / 6.0);
    let first = (1.0 - 2.0 * x).max(0.0).powi(2);
    let second = (1.0 - x).powi(2) / 4.0;
    first.max(second)
}

/// A row whose collection breaks `|m|/(n-|m|) (1 + sqrt(2 H(|m|)))² < η(K)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionWarning {
    pub row: usize,
    /// Model size attaining the largest left-hand side.
    pub size: usize,
    pub value: f64,
    pub eta: f64,
}

/// Checks the collection-size condition for one row given the number of
/// models of each size, `counts[d] = |{m : |m| = d}|`.
pub(crate) fn assumption_check(
    n: usize,
    row: usize,
    counts: &[f64],
    k: f64,
) -> Option<AssumptionWarning> {
    let eta = eta_bound(k);
    let mut worst: Option<(usize, f64)> = None;
    for (d, &count) in counts.iter().enumerate().skip(1) {
        if count <= 0.0 || d >= n {
            continue;
        }
        let h = count.ln() / d as f64;
        let v = d as f64 / (n - d) as f64 * (1.0 + (2.0 * h).sqrt()).powi(2);
        if worst.is_none_or(|(_, w)| v > w) {
            worst = Some((d, v));
        }
    }
    match worst {
        Some((size, value)) if value >= eta => Some(AssumptionWarning {
            row,
            size,
            value,
            eta,
        }),
        _ => None,
    }
}

/// `log C(q, d)`
pub(crate) fn log_binomial(q: usize, d: usize) -> f64 {
    if d > q {
        return f64::NEG_INFINITY;
    }
    let d = d.min(q - d);
    (0..d)
        .map(|j| ((q - j) as f64).ln() - ((j + 1) as f64).ln())
        .sum()
}
