//! Replicate orchestration.
//!
//! Replicate `r` belongs to matrix `r / N₂`. Every random draw comes from a
//! substream of the master seed, so any replicate can be rerun on its own:
//!
//! * matrix `m`: `substream(seed, m, 1)`
//! * sample of replicate `r`: `substream(seed, r, 0)`
//! * randomness of estimator `e` on replicate `r`: `substream(seed, r, 2 + e)`

use choselect::rng::substream;
use choselect::simgen::{
    gen_omega1, gen_omega1c, gen_omega2, gen_omega2c, power_fdr, FdrConvention,
};
use choselect::{loss_report, sample, Data, ModelGraph, Pair, Precision};
use rayon::prelude::*;

use crate::config::{Estimator, ExperimentConfig, OracleKind, SchemeConfig, SchemeKind};
use crate::error::{BenchError, Result};
use crate::estimators::estimate;
use crate::oracle::{loss_oracle, refit, risk_oracle, OracleTruth, RiskOracle};

pub const TAG_SAMPLE: u64 = 0;
pub const TAG_MATRIX: u64 = 1;
pub const TAG_ESTIMATOR: u64 = 2;

#[derive(Clone, Debug)]
pub struct Truth {
    pub pair: Pair,
    pub precision: Precision,
    pub graph: ModelGraph,
    /// Relocated variables of `Ω₂ᶜ`, original indices.
    pub displaced: Vec<usize>,
}

pub fn generate_truth(scheme: &SchemeConfig, seed: u64) -> Result<Truth> {
    scheme.validate()?;
    let p = scheme.p;
    let (pair, graph, displaced) = match scheme.kind {
        SchemeKind::Omega1 => {
            let pair = gen_omega1(p)?;
            (
                pair.clone(),
                ModelGraph::from_support(&pair, 0.0),
                Vec::new(),
            )
        }
        SchemeKind::Omega2 => {
            let pair = gen_omega2(p, scheme.blocks(), seed)?;
            (
                pair.clone(),
                ModelGraph::from_support(&pair, 0.0),
                Vec::new(),
            )
        }
        SchemeKind::Omega1c => {
            let (pair, graph) = gen_omega1c(p, scheme.esp.unwrap_or_default(), seed)?;
            (pair, graph, Vec::new())
        }
        SchemeKind::Omega2c => {
            let g = gen_omega2c(p, scheme.esp.unwrap_or_default(), seed)?;
            (g.pair, g.graph, g.displaced)
        }
    };
    Ok(Truth {
        precision: pair.precision(),
        pair,
        graph,
        displaced,
    })
}

pub fn matrix_seed(master: u64, matrix: usize) -> u64 {
    substream(master, matrix as u64, TAG_MATRIX)
}

pub fn sample_seed(master: u64, replicate: usize) -> u64 {
    substream(master, replicate as u64, TAG_SAMPLE)
}

pub fn estimator_seed(master: u64, replicate: usize, estimator: usize) -> u64 {
    substream(master, replicate as u64, TAG_ESTIMATOR + estimator as u64)
}

/// Metric names, in the order of [`Metrics::values`].
pub const METRICS: [&str; 7] = [
    "kullback",
    "operator_precision",
    "operator_covariance",
    "frobenius_precision",
    "power",
    "fdr",
    "fdr_over_true",
];

/// Losses of one estimate; graph metrics only when the estimator selects a
/// graph.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    pub kullback: f64,
    pub operator_precision: f64,
    pub operator_covariance: f64,
    pub frobenius_precision: f64,
    pub power: Option<f64>,
    /// False over total discoveries.
    pub fdr: Option<f64>,
    /// False over true discoveries.
    pub fdr_over_true: Option<f64>,
}

impl Metrics {
    pub fn compute(
        truth: &Truth,
        precision: &Precision,
        graph: Option<&ModelGraph>,
    ) -> Result<Self> {
        let losses = loss_report(&truth.precision, precision)?;
        let (power, fdr, fdr_over_true) = match graph {
            Some(g) => {
                let total = power_fdr(&truth.graph, g, FdrConvention::FalseOverTotal)?;
                let literal = power_fdr(&truth.graph, g, FdrConvention::FalseOverTrue)?;
                (Some(total.power), Some(total.fdr), Some(literal.fdr))
            }
            None => (None, None, None),
        };
        Ok(Self {
            kullback: losses.kullback,
            operator_precision: losses.operator_precision,
            operator_covariance: losses.operator_covariance,
            frobenius_precision: losses.frobenius_precision,
            power,
            fdr,
            fdr_over_true,
        })
    }

    pub fn values(&self) -> [Option<f64>; 7] {
        [
            Some(self.kullback),
            Some(self.operator_precision),
            Some(self.operator_covariance),
            Some(self.frobenius_precision),
            self.power,
            self.fdr,
            self.fdr_over_true,
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawRecord {
    pub replicate: usize,
    pub matrix: usize,
    pub estimator: usize,
    pub metrics: Metrics,
}

#[derive(Clone, Debug)]
pub struct BenchmarkRun {
    pub config: ExperimentConfig,
    pub estimators: Vec<Estimator>,
    /// Replicate-major, then estimator order.
    pub records: Vec<RawRecord>,
    /// Exact risk of each risk-oracle column, averaged over the matrices.
    pub analytic_risks: Vec<Option<f64>>,
}

struct MatrixTruth {
    truth: Truth,
    oracle_truth: Option<OracleTruth>,
    risk_oracles: Vec<Option<RiskOracle>>,
}

pub fn run_benchmark(config: &ExperimentConfig) -> Result<BenchmarkRun> {
    config.validate()?;
    let estimators = config.estimators()?;
    let (n1, n2) = config.nesting();
    let needs_oracle = estimators
        .iter()
        .any(|e| matches!(e, Estimator::Oracle { .. }));

    let matrices: Vec<MatrixTruth> = (0..n1)
        .into_par_iter()
        .map(|m| {
            let truth = generate_truth(&config.scheme, matrix_seed(config.seed, m))?;
            let oracle_truth = if needs_oracle {
                Some(OracleTruth::new(&truth.pair)?)
            } else {
                None
            };
            let risk_oracles = estimators
                .iter()
                .map(|e| match (e, &oracle_truth) {
                    (
                        Estimator::Oracle {
                            collection,
                            kind: OracleKind::Risk,
                        },
                        Some(t),
                    ) => risk_oracle(t, config.n, *collection).map(Some),
                    _ => Ok(None),
                })
                .collect::<choselect::Result<Vec<_>>>()?;
            Ok(MatrixTruth {
                truth,
                oracle_truth,
                risk_oracles,
            })
        })
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .collect::<Result<_>>()?;

    let per_replicate: Vec<Vec<RawRecord>> = (0..config.replicates)
        .into_par_iter()
        .map(|r| run_replicate(config, &estimators, &matrices[r / n2], r, r / n2))
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .collect::<Result<_>>()?;

    let records: Vec<RawRecord> = per_replicate.into_iter().flatten().collect();
    let analytic_risks = (0..estimators.len())
        .map(|e| {
            let risks: Option<Vec<f64>> = matrices
                .iter()
                .map(|m| m.risk_oracles[e].as_ref().map(|o| o.risk))
                .collect();
            risks.map(|r| r.iter().sum::<f64>() / r.len() as f64)
        })
        .collect();
    Ok(BenchmarkRun {
        config: config.clone(),
        estimators,
        records,
        analytic_risks,
    })
}

fn run_replicate(
    config: &ExperimentConfig,
    estimators: &[Estimator],
    matrix: &MatrixTruth,
    replicate: usize,
    matrix_index: usize,
) -> Result<Vec<RawRecord>> {
    let truth = &matrix.truth;
    let x: Data = sample(&truth.pair, config.n, sample_seed(config.seed, replicate))?;
    let mut records = Vec::with_capacity(estimators.len());
    for (e, estimator) in estimators.iter().enumerate() {
        let context = |source: BenchError| BenchError::Replicate {
            replicate,
            estimator: config.estimators[e].label(),
            source: Box::new(source),
        };
        let (precision, graph) = match estimator {
            Estimator::Oracle { collection, kind } => {
                let oracle_truth = matrix.oracle_truth.as_ref().expect("oracle truth computed");
                match kind {
                    OracleKind::Risk => {
                        let graph = matrix.risk_oracles[e]
                            .as_ref()
                            .expect("risk oracle computed")
                            .graph
                            .clone();
                        let pair = refit(&x, &graph).map_err(|err| context(err.into()))?;
                        (pair.precision(), Some(graph))
                    }
                    OracleKind::Loss => {
                        let o = loss_oracle(oracle_truth, &x, *collection)
                            .map_err(|err| context(err.into()))?;
                        (o.pair.precision(), Some(o.graph))
                    }
                }
            }
            _ => {
                let fit = estimate(estimator, &x, estimator_seed(config.seed, replicate, e))
                    .map_err(context)?;
                (fit.precision, fit.graph)
            }
        };
        let metrics = Metrics::compute(truth, &precision, graph.as_ref()).map_err(context)?;
        records.push(RawRecord {
            replicate,
            matrix: matrix_index,
            estimator: e,
            metrics,
        });
    }
    Ok(records)
}
