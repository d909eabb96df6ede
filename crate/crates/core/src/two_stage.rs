//! Two-stage selection: a Lasso path on each row's predecessors proposes a
//! small collection, then the penalized criterion picks among it.
//!
//! The same data serve both stages.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lasso::{build_collection_prefix, build_collection_subsets, lars_path, LarsOptions};
use crate::linalg::DataMatrix;
use crate::scalar::Scalar;
use crate::selection::{run_rows, ChoSelectFit, PenaltySpec, RowCandidates};

/// Largest `k` accepted, so that no power set exceeds `2^20` models.
pub const MAX_POWER_SET_WIDTH: usize = 20;

/// `⌊n / (2.5 (2 + log(n ∧ p)))⌋`, the cap used for the simulated DAGs.
pub fn default_fast_dim(n: usize, p: usize) -> usize {
    let m = n.min(p).max(1) as f64;
    (n as f64 / (2.5 * (2.0 + m.ln()))).floor() as usize
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Builder {
    /// Power set of the first `k` entrants plus the path prefixes.
    #[default]
    Prefix,
    /// Power sets of every active set of at most `k` variables plus the path
    /// prefixes.
    Subsets,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoStageConfig {
    /// Width of the power sets.
    pub k: usize,
    /// `D`, the number of variables the path may hold.
    pub max_active: usize,
    pub builder: Builder,
    pub penalty: PenaltySpec,
    /// `d`: models with more predecessors are discarded before selection.
    pub max_dim: usize,
    pub standardize: bool,
}

impl TwoStageConfig {
    /// `k = 8`, the prefix builder, `K = 1.1` and `D = d = default_fast_dim(n, p)`.
    pub fn new(n: usize, p: usize) -> Self {
        let d = default_fast_dim(n, p);
        Self {
            k: 8,
            max_active: d,
            builder: Builder::Prefix,
            penalty: PenaltySpec::complete(1.1).expect("constant above one"),
            max_dim: d,
            standardize: false,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if n < 4 {
            return Err(Error::InvalidInput(format!(
                "two-stage selection needs n >= 4, got {n}"
            )));
        }
        if self.k > MAX_POWER_SET_WIDTH {
            return Err(Error::Config(format!(
                "k = {} would materialize more than 2^{MAX_POWER_SET_WIDTH} subsets per row",
                self.k
            )));
        }
        if self.max_dim > n - 2 {
            return Err(Error::Config(format!(
                "d = {} exceeds n - 2 = {}",
                self.max_dim,
                n - 2
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct FastFit<F> {
    pub fit: ChoSelectFit<F>,
    /// `|M̂_i|` for every row.
    pub collection_sizes: Vec<usize>,
}

/// The collection proposed for row `row`.
pub fn row_collection<F: Scalar>(
    x: &DataMatrix<F>,
    row: usize,
    cfg: &TwoStageConfig,
) -> Result<Vec<Vec<usize>>> {
    if row == 0 {
        return Ok(vec![Vec::new()]);
    }
    let predecessors: Vec<usize> = (0..row).collect();
    let options = LarsOptions {
        max_active: cfg.max_active,
        standardize: cfg.standardize,
    };
    let path = lars_path(&x.select_columns(&predecessors), x.column(row), &options)?;
    let mut models = match cfg.builder {
        Builder::Prefix => build_collection_prefix(&path, row, cfg.k, cfg.max_active),
        Builder::Subsets => build_collection_subsets(&path, row, cfg.k, cfg.max_active),
    };
    models.retain(|m| m.len() <= cfg.max_dim);
    Ok(models)
}

pub fn choselect_fast<F: Scalar>(x: &DataMatrix<F>, cfg: &TwoStageConfig) -> Result<FastFit<F>> {
    cfg.validate(x.n())?;
    let collections: Vec<Vec<Vec<usize>>> = (0..x.p())
        .into_par_iter()
        .map(|row| row_collection(x, row, cfg).map_err(|e| e.at_row(row)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()?;
    let collection_sizes = collections.iter().map(Vec::len).collect();
    let fit = run_rows(x, &cfg.penalty, |row| {
        Ok(RowCandidates::List(collections[row].clone()))
    })?;
    Ok(FastFit {
        fit,
        collection_sizes,
    })
}
