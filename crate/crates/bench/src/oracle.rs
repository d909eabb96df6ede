//! Oracle models, computable only when the true `Ω` is known.
//!
//! The risk oracle fixes, for each row, the candidate minimizing the exact
//! Kullback risk `bias + R_{n,|m|}` and refits it on every replicate. The
//! loss oracle instead picks, on each replicate, the fitted candidate with
//! the smallest conditional Kullback loss against the truth, so it never
//! loses to a selection procedure scanning the same collection.

use choselect::linalg::NestedFits;
use choselect::losses::project_row;
use choselect::selection::{ordered_predecessors, Orientation};
use choselect::{
    conditional_kullback, enumerate_complete, enumerate_ordered, fit_row, risk_term, Data, Matrix,
    ModelGraph, Pair, Result,
};

use crate::config::OracleCollection;

/// Truth quantities shared by both oracles.
#[derive(Clone, Debug)]
pub struct OracleTruth {
    pub pair: Pair,
    pub sigma: Matrix,
    heads: Vec<Matrix>,
}

impl OracleTruth {
    pub fn new(pair: &Pair) -> Result<Self> {
        let sigma = pair.precision().covariance()?;
        let heads = (0..pair.p())
            .map(|i| {
                let idx: Vec<usize> = (0..i).collect();
                sigma.select(&idx, &idx)
            })
            .collect();
        Ok(Self {
            pair: pair.clone(),
            sigma,
            heads,
        })
    }

    /// Conditional Kullback loss of row `row` estimated by `(t, s)`.
    pub fn row_loss(&self, row: usize, t: &[f64], s: f64) -> f64 {
        conditional_kullback(
            self.pair.row_coefficients(row),
            self.pair.s()[row],
            t,
            s,
            &self.heads[row],
        )
    }

    /// `K(t_i, s_i; t_m, s_m)` of the population projection onto `model`.
    pub fn bias(&self, row: usize, model: &[usize]) -> Result<f64> {
        let (t, s) = project_row(&self.sigma, row, model)?;
        Ok(self.row_loss(row, &t, s))
    }
}

fn candidates(row: usize, collection: OracleCollection) -> Result<Vec<Vec<usize>>> {
    match collection {
        OracleCollection::Ordered { max_dim } => {
            Ok(enumerate_ordered(row, max_dim, Orientation::NearestFirst))
        }
        OracleCollection::Complete { max_dim, budget } => enumerate_complete(row, max_dim, budget),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RiskOracle {
    pub graph: ModelGraph,
    /// `min_m bias + R_{n,|m|}` per row.
    pub row_risks: Vec<f64>,
    /// Sum of the row risks: the exact risk of the oracle estimator.
    pub risk: f64,
}

/// Candidates whose dimension leaves no finite risk (`|m| > n - 3`) are
/// skipped; ties go to the earlier candidate, so to the smaller model.
pub fn risk_oracle(
    truth: &OracleTruth,
    n: usize,
    collection: OracleCollection,
) -> Result<RiskOracle> {
    let p = truth.pair.p();
    let mut rows = Vec::with_capacity(p);
    let mut row_risks = Vec::with_capacity(p);
    for row in 0..p {
        let mut best: Option<(f64, Vec<usize>)> = None;
        for model in candidates(row, collection)? {
            let Ok(variance) = risk_term(n, model.len()) else {
                continue;
            };
            let risk = truth.bias(row, &model)? + variance;
            if best.as_ref().is_none_or(|(b, _)| risk < *b) {
                best = Some((risk, model));
            }
        }
        let (risk, model) = best.expect("the empty model always has a finite risk");
        row_risks.push(risk);
        rows.push(model);
    }
    Ok(RiskOracle {
        graph: ModelGraph::new(rows)?,
        risk: row_risks.iter().sum(),
        row_risks,
    })
}

/// Least-squares fit of every row of `graph`.
pub fn refit(x: &Data, graph: &ModelGraph) -> Result<Pair> {
    let mut rows = Vec::with_capacity(x.p());
    let mut s = Vec::with_capacity(x.p());
    for row in 0..x.p() {
        let fit = fit_row(x, row, graph.row(row))?;
        rows.push(fit.dense_coefficients(row));
        s.push(fit.residual_variance);
    }
    Pair::from_rows(&rows, s)
}

#[derive(Clone, Debug)]
pub struct LossOracle {
    pub graph: ModelGraph,
    pub pair: Pair,
    pub row_losses: Vec<f64>,
}

/// Per row, the fitted candidate of least conditional Kullback loss. Fits
/// with a rank deficient design or a zero residual are skipped.
pub fn loss_oracle(
    truth: &OracleTruth,
    x: &Data,
    collection: OracleCollection,
) -> Result<LossOracle> {
    let p = x.p();
    let mut rows = Vec::with_capacity(p);
    let mut t_rows = Vec::with_capacity(p);
    let mut s = Vec::with_capacity(p);
    let mut row_losses = Vec::with_capacity(p);
    for row in 0..p {
        let mut best: Option<(f64, Vec<usize>, Vec<f64>, f64)> = None;
        let mut consider = |model: Vec<usize>, t: Vec<f64>, sv: f64| {
            if sv.is_nan() || sv <= 0.0 {
                return;
            }
            let loss = truth.row_loss(row, &t, sv);
            if best.as_ref().is_none_or(|b| loss < b.0) {
                best = Some((loss, model, t, sv));
            }
        };
        match collection {
            OracleCollection::Ordered { max_dim } => {
                let order = ordered_predecessors(row, max_dim, Orientation::NearestFirst);
                let nested = NestedFits::new(x, row, &order);
                for len in 0..=nested.rank() {
                    if let Some(fit) = nested.fit(len) {
                        let mut model = fit.model.clone();
                        model.sort_unstable();
                        consider(model, fit.dense_coefficients(row), fit.residual_variance);
                    }
                }
            }
            OracleCollection::Complete { .. } => {
                for model in candidates(row, collection)? {
                    if let Ok(fit) = fit_row(x, row, &model) {
                        consider(model, fit.dense_coefficients(row), fit.residual_variance);
                    }
                }
            }
        }
        let (loss, model, t, sv) = best.ok_or(choselect::Error::AllInfeasible { row })?;
        row_losses.push(loss);
        rows.push(model);
        t_rows.push(t);
        s.push(sv);
    }
    Ok(LossOracle {
        graph: ModelGraph::new(rows)?,
        pair: Pair::from_rows(&t_rows, s)?,
        row_losses,
    })
}
