//! Aggregation and report files.
//!
//! `report.json` is a pure function of the configuration: it holds no
//! timestamps or durations, which go to `timing.json` instead.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::config::{Estimator, FdrName, OracleCollection, OracleKind};
use crate::error::Result;
use crate::io::{ensure_dir, number, write_atomic};
use crate::runner::{BenchmarkRun, METRICS};

pub const FORMAT: &str = "choselect-report/1";

/// Mean and 95% interval half-width `1.96 SD / √N` with the sample standard
/// deviation; no half-width for a single value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub half_width: Option<f64>,
    pub count: usize,
}

pub fn summarize(values: &[f64]) -> Option<Summary> {
    let count = values.len();
    if count == 0 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / count as f64;
    let half_width = (count > 1).then(|| {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
        1.96 * var.sqrt() / (count as f64).sqrt()
    });
    Some(Summary {
        mean,
        half_width,
        count,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimatorReport {
    pub name: String,
    pub method: String,
    pub parameters: String,
    pub metrics: BTreeMap<String, Summary>,
    /// Exact Kullback risk of a risk-oracle column, averaged over matrices.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_risk: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Unavailable {
    pub name: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub format: String,
    pub config_hash: String,
    pub versions: BTreeMap<String, String>,
    pub scheme: String,
    pub p: usize,
    pub n: usize,
    pub seed: u64,
    pub replicates: usize,
    pub matrices: usize,
    pub samples_per_matrix: usize,
    /// Convention of the `fdr` column of the human table.
    pub fdr_convention: String,
    pub estimators: Vec<EstimatorReport>,
    pub unavailable: Vec<Unavailable>,
}

pub fn describe(estimator: &Estimator) -> String {
    match estimator {
        Estimator::Ordered { penalty, max_dim } => format!("K={} d={max_dim}", penalty.k),
        Estimator::Complete { penalty, max_dim } => format!("K={} d={max_dim}", penalty.k),
        Estimator::Fast(c) => format!(
            "K={} d={} k={} D={} builder={:?} standardize={}",
            c.penalty.k, c.max_dim, c.k, c.max_active, c.builder, c.standardize
        ),
        Estimator::Banded { kmax, splits } => format!("kmax={kmax} splits={splits}"),
        Estimator::Ledoit { center } => format!("center={center}"),
        Estimator::Oracle { collection, kind } => {
            let coll = match collection {
                OracleCollection::Ordered { max_dim } => format!("ordered d={max_dim}"),
                OracleCollection::Complete { max_dim, .. } => format!("complete d={max_dim}"),
            };
            let kind = match kind {
                OracleKind::Risk => "risk",
                OracleKind::Loss => "loss",
            };
            format!("{kind} oracle, {coll}")
        }
    }
}

fn method_notes(estimator: &Estimator) -> Vec<String> {
    match estimator {
        Estimator::Banded { .. } => vec![
            "band chosen by held-out Gaussian likelihood on random 2/3-1/3 splits, a stand-in for the usual risk-estimate splits"
                .into(),
        ],
        Estimator::Oracle { kind: OracleKind::Risk, .. } => {
            vec!["row models fixed at the least exact Kullback risk, refitted on every replicate".into()]
        }
        Estimator::Oracle { kind: OracleKind::Loss, .. } => {
            vec!["row models chosen per replicate by the least Kullback loss of the fit".into()]
        }
        _ => Vec::new(),
    }
}

pub fn build_report(run: &BenchmarkRun) -> BenchmarkReport {
    let config = &run.config;
    let (n1, n2) = config.nesting();
    let estimators = run
        .estimators
        .iter()
        .enumerate()
        .map(|(e, estimator)| {
            let mut metrics = BTreeMap::new();
            for (k, name) in METRICS.iter().enumerate() {
                let values: Vec<f64> = run
                    .records
                    .iter()
                    .filter(|r| r.estimator == e)
                    .filter_map(|r| r.metrics.values()[k])
                    .collect();
                if let Some(s) = summarize(&values) {
                    metrics.insert((*name).to_string(), s);
                }
            }
            EstimatorReport {
                name: config.estimators[e].label(),
                method: config.estimators[e].method.name().into(),
                parameters: describe(estimator),
                metrics,
                analytic_risk: run.analytic_risks[e],
                notes: method_notes(estimator),
            }
        })
        .collect();
    let versions = BTreeMap::from([
        ("choselect".to_string(), choselect::VERSION.to_string()),
        (
            "choselect-bench".to_string(),
            env!("CARGO_PKG_VERSION").to_string(),
        ),
    ]);
    BenchmarkReport {
        format: FORMAT.into(),
        config_hash: config.hash(),
        versions,
        scheme: format!("{:?}", config.scheme.kind).to_lowercase(),
        p: config.scheme.p,
        n: config.n,
        seed: config.seed,
        replicates: config.replicates,
        matrices: n1,
        samples_per_matrix: n2,
        fdr_convention: match config.fdr {
            FdrName::FalseOverTotal => "false_over_total".into(),
            FdrName::FalseOverTrue => "false_over_true".into(),
        },
        estimators,
        unavailable: vec![
            Unavailable {
                name: "nested_lasso".into(),
                reason: "not implemented".into(),
            },
            Unavailable {
                name: "glasso".into(),
                reason: "not implemented".into(),
            },
        ],
    }
}

impl BenchmarkReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// `estimator,metric,mean,half_width,count`; an empty half-width is not
    /// applicable.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("estimator,metric,mean,half_width,count\n");
        for e in &self.estimators {
            for name in METRICS {
                if let Some(s) = e.metrics.get(name) {
                    let hw = s.half_width.map(number).unwrap_or_default();
                    out.push_str(&format!(
                        "{},{name},{},{hw},{}\n",
                        e.name,
                        number(s.mean),
                        s.count
                    ));
                }
            }
        }
        out
    }

    pub fn to_table(&self) -> String {
        let fdr_key = if self.fdr_convention == "false_over_true" {
            "fdr_over_true"
        } else {
            "fdr"
        };
        let columns = [
            ("kullback", "Kullback"),
            ("operator_precision", "op(Omega)"),
            ("operator_covariance", "op(Sigma)"),
            ("frobenius_precision", "Frob(Omega)"),
            ("power", "power"),
            (fdr_key, "FDR"),
        ];
        let mut out = format!(
            "{} p={} n={} N={} ({} x {}) seed={}  FDR: {}\n",
            self.scheme,
            self.p,
            self.n,
            self.replicates,
            self.matrices,
            self.samples_per_matrix,
            self.seed,
            self.fdr_convention
        );
        let mut rows = vec![std::iter::once("estimator".to_string())
            .chain(columns.iter().map(|c| c.1.to_string()))
            .collect::<Vec<_>>()];
        for e in &self.estimators {
            let mut row = vec![e.name.clone()];
            for (key, _) in columns {
                row.push(match e.metrics.get(key) {
                    Some(Summary {
                        mean,
                        half_width: Some(hw),
                        ..
                    }) => format!("{mean:.3} ± {hw:.3}"),
                    Some(Summary {
                        mean,
                        half_width: None,
                        ..
                    }) => format!("{mean:.3} (n/a)"),
                    None => "-".into(),
                });
            }
            rows.push(row);
        }
        for u in &self.unavailable {
            let mut row = vec![u.name.clone()];
            row.extend(columns.iter().map(|_| "unavailable".to_string()));
            rows.push(row);
        }
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        for row in rows {
            let cells: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(cell, &w)| format!("{cell}{}", " ".repeat(w - cell.chars().count())))
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

/// `replicate,matrix,estimator,<metrics>`, empty where a metric does not
/// apply.
pub fn raw_losses_csv(run: &BenchmarkRun) -> String {
    let mut out = format!("replicate,matrix,estimator,{}\n", METRICS.join(","));
    for r in &run.records {
        let values: Vec<String> = r
            .metrics
            .values()
            .iter()
            .map(|v| v.map(number).unwrap_or_default())
            .collect();
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.replicate,
            r.matrix,
            run.config.estimators[r.estimator].label(),
            values.join(",")
        ));
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub started_unix_seconds: u64,
    pub wall_seconds: f64,
    pub threads: usize,
}

/// Writes every report file into `dir` and returns the report.
pub fn write_reports(run: &BenchmarkRun, dir: &Path, timing: &Timing) -> Result<BenchmarkReport> {
    ensure_dir(dir)?;
    let report = build_report(run);
    write_atomic(&dir.join("report.json"), report.to_json().as_bytes())?;
    write_atomic(&dir.join("report.csv"), report.to_csv().as_bytes())?;
    write_atomic(&dir.join("report.txt"), report.to_table().as_bytes())?;
    write_atomic(&dir.join("raw_losses.csv"), raw_losses_csv(run).as_bytes())?;
    write_atomic(&dir.join("config.toml"), run.config.to_toml().as_bytes())?;
    let timing = serde_json::to_string_pretty(timing).expect("timing serializes");
    write_atomic(&dir.join("timing.json"), timing.as_bytes())?;
    Ok(report)
}
