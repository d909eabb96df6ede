//! Dispatch from a resolved [`Estimator`] to the library.

use choselect::baselines::{banded_estimator, ledoit_wolf};
use choselect::{
    choselect, choselect_fast, decompose, CollectionSpec, Data, ModelGraph, Pair, Precision,
    RowSelection,
};

use crate::config::Estimator;
use crate::error::{BenchError, Result};

#[derive(Clone, Debug)]
pub struct Estimate {
    pub precision: Precision,
    pub pair: Pair,
    /// Selected Cholesky support; `None` for the shrinkage estimator.
    pub graph: Option<ModelGraph>,
    /// Per-row selection details of the penalized procedures.
    pub rows: Vec<RowSelection<f64>>,
    pub notes: Vec<String>,
}

/// Fits `estimator` on `x`. `seed` drives the random splits of the banded
/// estimator. Oracles need the truth and are handled by the runner.
pub fn estimate(estimator: &Estimator, x: &Data, seed: u64) -> Result<Estimate> {
    Ok(match estimator {
        Estimator::Ordered { penalty, max_dim } => {
            let fit = choselect(x, &CollectionSpec::ordered(*max_dim), penalty)?;
            let notes = fit.warnings.iter().map(|w| format!("{w:?}")).collect();
            Estimate {
                precision: fit.precision,
                pair: fit.pair,
                graph: Some(fit.graph),
                rows: fit.rows,
                notes,
            }
        }
        Estimator::Complete { penalty, max_dim } => {
            let fit = choselect(x, &CollectionSpec::complete(*max_dim), penalty)?;
            let notes = fit.warnings.iter().map(|w| format!("{w:?}")).collect();
            Estimate {
                precision: fit.precision,
                pair: fit.pair,
                graph: Some(fit.graph),
                rows: fit.rows,
                notes,
            }
        }
        Estimator::Fast(cfg) => {
            let fast = choselect_fast(x, cfg)?;
            let fit = fast.fit;
            let notes = vec![format!("collection sizes {:?}", fast.collection_sizes)];
            Estimate {
                precision: fit.precision,
                pair: fit.pair,
                graph: Some(fit.graph),
                rows: fit.rows,
                notes,
            }
        }
        Estimator::Banded { kmax, splits } => {
            let fit = banded_estimator(x, *kmax, *splits, seed)?;
            let notes = vec![format!(
                "band k = {} chosen on {splits} random 2/3-1/3 likelihood splits",
                fit.choice.k
            )];
            Estimate {
                precision: fit.precision,
                pair: fit.pair,
                graph: Some(fit.graph),
                rows: Vec::new(),
                notes,
            }
        }
        Estimator::Ledoit { center } => {
            let lw = ledoit_wolf(x, *center)?;
            let precision = Precision::from_covariance(&lw.covariance)?;
            let pair = decompose(&precision)?;
            let notes = vec![format!(
                "shrinkage {} towards {} I",
                lw.shrinkage, lw.target_scale
            )];
            Estimate {
                precision,
                pair,
                graph: None,
                rows: Vec::new(),
                notes,
            }
        }
        Estimator::Oracle { .. } => {
            return Err(BenchError::UnsupportedScheme(
                "oracles need a simulated truth".into(),
            ));
        }
    })
}
