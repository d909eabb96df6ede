//! Penalized model selection over the rows of the Cholesky factor.
//!
//! Row `i` picks the candidate `m` minimizing `log ŝ_{i,m} + pen_i(m)`; the
//! selected rows are refitted by least squares and assembled into
//! `Ω̃ = Tᵀ diag(S)⁻¹ T`.

mod collection;
mod gram;
mod penalty;

use std::cmp::Ordering;

use rayon::prelude::*;

pub(crate) use collection::combinations;
pub use collection::{
    complete_collection_size, enumerate_complete, enumerate_ordered, ordered_predecessors,
    CollectionSpec, Orientation, DEFAULT_COMPLETE_BUDGET,
};
pub(crate) use gram::Gram;
pub use penalty::{eta_bound, AssumptionWarning, PenaltyKind, PenaltySpec, PriorWeights};

use crate::error::{Error, Result};
use crate::graph::ModelGraph;
use crate::linalg::{fit_row, validate_model, CholeskyPair, DataMatrix, PrecisionMatrix};
use crate::scalar::Scalar;
use gram::{PrefixStack, Push};
use penalty::assumption_check;

/// Outcome of the selection for one row.
#[derive(Clone, Debug, PartialEq)]
pub struct RowSelection<F> {
    pub row: usize,
    /// Selected predecessors, ascending.
    pub model: Vec<usize>,
    /// Row `row` of `T̃` left of the diagonal (length `row`).
    pub coefficients: Vec<F>,
    pub residual_variance: F,
    /// `log ŝ + pen` of the selected model.
    pub criterion: f64,
    /// Candidates whose criterion was computed.
    pub evaluated: u128,
    /// Candidates skipped for an exact fit or a rank deficient design.
    pub infeasible: u128,
}

#[derive(Clone, Debug)]
pub struct ChoSelectFit<F> {
    pub graph: ModelGraph,
    pub pair: CholeskyPair<F>,
    pub precision: PrecisionMatrix<F>,
    pub rows: Vec<RowSelection<F>>,
    /// Rows whose collection is too rich for the chosen `K`; informative only.
    pub warnings: Vec<AssumptionWarning>,
}

/// Candidates of one row in the form the scanner consumes.
#[derive(Clone, Debug)]
pub(crate) enum RowCandidates {
    /// Every prefix of this push order, the empty one included.
    Nested(Vec<usize>),
    Complete {
        max_dim: usize,
        budget: u128,
    },
    List(Vec<Vec<usize>>),
}

impl RowCandidates {
    fn of(collection: &CollectionSpec, row: usize) -> Self {
        match collection {
            CollectionSpec::Ordered {
                max_dim,
                orientation,
            } => Self::Nested(ordered_predecessors(row, *max_dim, *orientation)),
            CollectionSpec::Complete { max_dim, budget } => Self::Complete {
                max_dim: *max_dim,
                budget: *budget,
            },
            CollectionSpec::Explicit(rows) => Self::List(rows[row].clone()),
        }
    }

    fn size_counts(&self, row: usize) -> Vec<f64> {
        match self {
            Self::Nested(order) => vec![1.0; order.len() + 1],
            Self::Complete { max_dim, budget } => CollectionSpec::Complete {
                max_dim: *max_dim,
                budget: *budget,
            }
            .size_counts(row),
            Self::List(models) => CollectionSpec::Explicit(vec![models.clone()]).size_counts(0),
        }
    }
}

/// Largest `d` of the ordered collection that reportedly works well, `⌊n/2⌋`.
pub fn default_ordered_dim(n: usize) -> usize {
    n / 2
}

/// `⌊n / (2.5 [2 + (log(p/n) ∨ 0)])⌋`, the advised cap for complete collections.
pub fn default_complete_dim(n: usize, p: usize) -> usize {
    let excess = ((p as f64) / (n as f64)).ln().max(0.0);
    ((n as f64) / (2.5 * (2.0 + excess))).floor() as usize
}

/// Selects among `models` for row `row`.
pub fn select_row<F: Scalar>(
    x: &DataMatrix<F>,
    row: usize,
    models: &[Vec<usize>],
    spec: &PenaltySpec,
) -> Result<RowSelection<F>> {
    if row >= x.p() {
        return Err(Error::InvalidInput(format!(
            "row {row} out of range for p = {}",
            x.p()
        )));
    }
    let gram = Gram::new(x);
    select_with_gram(x, &gram, row, RowCandidates::List(models.to_vec()), spec).map(|(s, _)| s)
}

/// `log ŝ_{i,m} + pen_i(m)` as the selection computes it, or `None` when the
/// model is infeasible.
pub fn criterion<F: Scalar>(
    x: &DataMatrix<F>,
    row: usize,
    model: &[usize],
    spec: &PenaltySpec,
) -> Result<Option<f64>> {
    if row >= x.p() {
        return Err(Error::InvalidInput(format!(
            "row {row} out of range for p = {}",
            x.p()
        )));
    }
    validate_model(row, model)?;
    let gram = Gram::new(x);
    let mut stack = PrefixStack::new(&gram, row);
    for &j in model {
        if stack.push(j) == Push::Dependent {
            return Ok(None);
        }
    }
    match stack.residual_variance() {
        Some(s) => Ok(Some(s.ln() + spec.value(x.n(), row, model)?)),
        None => Ok(None),
    }
}

/// Runs the selection on every row and assembles the estimate.
pub fn choselect<F: Scalar>(
    x: &DataMatrix<F>,
    collection: &CollectionSpec,
    spec: &PenaltySpec,
) -> Result<ChoSelectFit<F>> {
    check_compatible(collection, spec)?;
    if let CollectionSpec::Explicit(rows) = collection {
        if rows.len() != x.p() {
            return Err(Error::SizeMismatch {
                expected: x.p(),
                found: rows.len(),
            });
        }
    }
    run_rows(x, spec, |row| Ok(RowCandidates::of(collection, row)))
}

fn check_compatible(collection: &CollectionSpec, spec: &PenaltySpec) -> Result<()> {
    let ok = matches!(
        (collection, &spec.kind),
        (CollectionSpec::Explicit(_), _)
            | (_, PenaltyKind::Prior(_))
            | (CollectionSpec::Ordered { .. }, PenaltyKind::Ordered)
            | (
                CollectionSpec::Complete { .. },
                PenaltyKind::Complete { .. }
            )
    );
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{:?} penalty does not fit this collection",
            spec.kind
        )))
    }
}

/// Row-parallel driver shared with the two-stage procedure. Output does not
/// depend on scheduling; the first failing row (by index) is reported.
pub(crate) fn run_rows<F, C>(
    x: &DataMatrix<F>,
    spec: &PenaltySpec,
    candidates: C,
) -> Result<ChoSelectFit<F>>
where
    F: Scalar,
    C: Fn(usize) -> Result<RowCandidates> + Sync,
{
    let gram = Gram::new(x);
    let results: Vec<Result<(RowSelection<F>, Option<AssumptionWarning>)>> = (0..x.p())
        .into_par_iter()
        .map(|row| {
            let cands = candidates(row).map_err(|e| e.at_row(row))?;
            select_with_gram(x, &gram, row, cands, spec).map_err(|e| e.at_row(row))
        })
        .collect();
    let mut rows = Vec::with_capacity(results.len());
    let mut warnings = Vec::new();
    for r in results {
        let (sel, warning) = r?;
        rows.push(sel);
        warnings.extend(warning);
    }
    assemble_fit(rows, warnings)
}

fn assemble_fit<F: Scalar>(
    rows: Vec<RowSelection<F>>,
    warnings: Vec<AssumptionWarning>,
) -> Result<ChoSelectFit<F>> {
    let coefficients: Vec<Vec<F>> = rows.iter().map(|r| r.coefficients.clone()).collect();
    let s = rows.iter().map(|r| r.residual_variance).collect();
    let pair = CholeskyPair::from_rows(&coefficients, s)?;
    let graph = ModelGraph::new(rows.iter().map(|r| r.model.clone()).collect())?;
    let precision = pair.precision();
    Ok(ChoSelectFit {
        graph,
        pair,
        precision,
        rows,
        warnings,
    })
}

struct Best {
    criterion: f64,
    model: Vec<usize>,
}

struct Scorer<'s> {
    spec: &'s PenaltySpec,
    n: usize,
    row: usize,
    by_size: Option<Vec<f64>>,
    best: Option<Best>,
    evaluated: u128,
    infeasible: u128,
}

impl Scorer<'_> {
    /// `sorted_model` must be ascending.
    fn consider(&mut self, sorted_model: &[usize], s: f64) -> Result<()> {
        let pen = match &self.by_size {
            Some(table) => table[sorted_model.len()],
            None => self.spec.value(self.n, self.row, sorted_model)?,
        };
        let crit = s.ln() + pen;
        self.evaluated += 1;
        let wins = match &self.best {
            None => true,
            Some(b) => match crit.partial_cmp(&b.criterion) {
                Some(Ordering::Less) => true,
                Some(Ordering::Equal) => {
                    (sorted_model.len(), sorted_model) < (b.model.len(), b.model.as_slice())
                }
                _ => false,
            },
        };
        if wins {
            self.best = Some(Best {
                criterion: crit,
                model: sorted_model.to_vec(),
            });
        }
        Ok(())
    }
}

fn select_with_gram<F: Scalar>(
    x: &DataMatrix<F>,
    gram: &Gram,
    row: usize,
    candidates: RowCandidates,
    spec: &PenaltySpec,
) -> Result<(RowSelection<F>, Option<AssumptionWarning>)> {
    let n = x.n();
    let largest = match &candidates {
        RowCandidates::Nested(order) => order.len(),
        RowCandidates::Complete { max_dim, budget } => {
            let count = complete_collection_size(row, *max_dim);
            if count > *budget {
                return Err(Error::BudgetExceeded {
                    count,
                    budget: *budget,
                });
            }
            (*max_dim).min(row)
        }
        RowCandidates::List(models) => {
            if models.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "row {row} has an empty collection"
                )));
            }
            for m in models {
                validate_model(row, m)?;
            }
            models.iter().map(Vec::len).max().unwrap_or(0)
        }
    };
    let limit = n.saturating_sub(2);
    if largest > limit {
        return Err(Error::DimensionTooLarge {
            dim: largest,
            limit,
        });
    }
    let by_size = if spec.is_size_based() {
        Some(
            (0..=largest)
                .map(|d| spec.for_size(n, row, d))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    let warning = assumption_check(n, row, &candidates.size_counts(row), spec.k);

    let mut scorer = Scorer {
        spec,
        n,
        row,
        by_size,
        best: None,
        evaluated: 0,
        infeasible: 0,
    };
    let mut stack = PrefixStack::new(gram, row);
    match candidates {
        RowCandidates::Nested(order) => scan_nested(&mut stack, &mut scorer, &order)?,
        RowCandidates::Complete { max_dim, .. } => {
            let max_dim = max_dim.min(row);
            match stack.residual_variance() {
                Some(s) => {
                    scorer.consider(&[], s)?;
                    scan_complete(&mut stack, &mut scorer, 0, row, max_dim)?;
                }
                None => scorer.infeasible += complete_collection_size(row, max_dim),
            }
        }
        RowCandidates::List(mut models) => {
            models.sort();
            models.dedup();
            scan_list(&mut stack, &mut scorer, &models)?;
        }
    }

    let Some(best) = scorer.best else {
        return Err(Error::AllInfeasible { row });
    };
    let fit = fit_row(x, row, &best.model)?;
    let selection = RowSelection {
        row,
        coefficients: fit.dense_coefficients(row),
        residual_variance: fit.residual_variance,
        model: best.model,
        criterion: best.criterion,
        evaluated: scorer.evaluated,
        infeasible: scorer.infeasible,
    };
    Ok((selection, warning))
}

fn scan_nested(
    stack: &mut PrefixStack<'_>,
    scorer: &mut Scorer<'_>,
    order: &[usize],
) -> Result<()> {
    let total = order.len() as u128 + 1;
    let mut sorted: Vec<usize> = Vec::with_capacity(order.len());
    let Some(s) = stack.residual_variance() else {
        scorer.infeasible += total;
        return Ok(());
    };
    scorer.consider(&[], s)?;
    for (k, &j) in order.iter().enumerate() {
        match stack.push(j) {
            Push::Fit(s) => {
                let pos = sorted.partition_point(|&v| v < j);
                sorted.insert(pos, j);
                scorer.consider(&sorted, s)?;
            }
            Push::ZeroResidual | Push::Dependent => {
                scorer.infeasible += (order.len() - k) as u128;
                break;
            }
        }
    }
    Ok(())
}

/// Depth-first scan of every subset of `start..row` extending the stack, up
/// to `max_dim` members. Subtrees under an infeasible set are infeasible too
/// and are skipped.
fn scan_complete(
    stack: &mut PrefixStack<'_>,
    scorer: &mut Scorer<'_>,
    start: usize,
    row: usize,
    max_dim: usize,
) -> Result<()> {
    let len = stack.len();
    if len == max_dim {
        return Ok(());
    }
    for j in start..row {
        match stack.push(j) {
            Push::Fit(s) => {
                scorer.consider(stack.members(), s)?;
                scan_complete(stack, scorer, j + 1, row, max_dim)?;
                stack.pop();
            }
            outcome => {
                if outcome == Push::ZeroResidual {
                    stack.pop();
                }
                scorer.infeasible += complete_collection_size(row - j - 1, max_dim - len - 1);
            }
        }
    }
    Ok(())
}

/// Scans ascending, lexicographically sorted models, reusing shared prefixes.
fn scan_list(
    stack: &mut PrefixStack<'_>,
    scorer: &mut Scorer<'_>,
    models: &[Vec<usize>],
) -> Result<()> {
    for m in models {
        let common = stack
            .members()
            .iter()
            .zip(m)
            .take_while(|(a, b)| a == b)
            .count();
        stack.truncate(common);
        let mut feasible = true;
        for &j in &m[common..] {
            if stack.push(j) == Push::Dependent {
                feasible = false;
                break;
            }
        }
        match stack.residual_variance() {
            Some(s) if feasible => scorer.consider(m, s)?,
            _ => scorer.infeasible += 1,
        }
    }
    Ok(())
}
