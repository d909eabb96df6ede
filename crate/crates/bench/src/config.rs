//! Experiment configuration: one TOML file per experiment.
//!
//! ```toml
//! seed = 1
//! n = 100
//! replicates = 100
//! matrices = 10          # N₁ for random schemes; N₂ = replicates / matrices
//! fdr = "false_over_total"
//!
//! [scheme]
//! kind = "omega2"        # omega1 | omega2 | omega1c | omega2c
//! p = 30
//! blocks = 1             # omega2
//! # esp = 1.0            # omega1c, omega2c
//!
//! [[estimators]]
//! method = "ordered"     # ordered | complete | fast | banded | ledoit | oracle
//! K = 3.0
//! d = 50
//! ```
//!
//! Unset estimator fields take the defaults listed on [`EstimatorConfig`].

use std::path::Path;

use choselect::selection::{
    default_complete_dim, default_ordered_dim, PenaltyKind, DEFAULT_COMPLETE_BUDGET,
};
use choselect::simgen::{FdrConvention, RELOCATED};
use choselect::two_stage::{default_fast_dim, MAX_POWER_SET_WIDTH};
use choselect::{Builder, PenaltySpec, TwoStageConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{BenchError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Omega1,
    Omega2,
    Omega1c,
    Omega2c,
}

impl SchemeKind {
    /// Whether each matrix draw depends on the seed.
    pub fn is_random(self) -> bool {
        self != SchemeKind::Omega1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    pub p: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub esp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<usize>,
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(field(
                "scheme.p",
                format!("must be at least 2, got {}", self.p),
            ));
        }
        let needs_esp = matches!(self.kind, SchemeKind::Omega1c | SchemeKind::Omega2c);
        match (needs_esp, self.esp) {
            (true, None) => return Err(field("scheme.esp", "required for this scheme")),
            (true, Some(e)) if e <= 0.0 || !e.is_finite() => {
                return Err(field("scheme.esp", format!("must be positive, got {e}")))
            }
            (false, Some(_)) => {
                return Err(field("scheme.esp", "only omega1c and omega2c take it"))
            }
            _ => {}
        }
        match (self.kind, self.blocks) {
            (SchemeKind::Omega2, Some(b)) if b == 0 || !self.p.is_multiple_of(b) => {
                return Err(field(
                    "scheme.blocks",
                    format!("{b} does not divide p = {}", self.p),
                ))
            }
            (SchemeKind::Omega2, _) => {}
            (_, Some(_)) => return Err(field("scheme.blocks", "only omega2 takes it")),
            _ => {}
        }
        if self.kind == SchemeKind::Omega2c && self.p <= RELOCATED {
            return Err(field("scheme.p", format!("omega2c needs p > {RELOCATED}")));
        }
        Ok(())
    }

    pub fn blocks(&self) -> usize {
        self.blocks.unwrap_or(1)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Ordered,
    Complete,
    Fast,
    Banded,
    Ledoit,
    /// Needs a simulated truth, so only experiment files may use it.
    #[value(skip)]
    Oracle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ordered => "ordered",
            Method::Complete => "complete",
            Method::Fast => "fast",
            Method::Banded => "banded",
            Method::Ledoit => "ledoit",
            Method::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BuilderName {
    #[default]
    Prefix,
    Subsets,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    /// Per row, the model of least Kullback risk, fixed across replicates.
    #[default]
    Risk,
    /// Per replicate and row, the fitted model of least Kullback loss.
    Loss,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CollectionName {
    #[default]
    Ordered,
    Complete,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FdrName {
    #[default]
    FalseOverTotal,
    FalseOverTrue,
}

impl From<FdrName> for FdrConvention {
    fn from(f: FdrName) -> Self {
        match f {
            FdrName::FalseOverTotal => FdrConvention::FalseOverTotal,
            FdrName::FalseOverTrue => FdrConvention::FalseOverTrue,
        }
    }
}

/// One estimator column. Defaults, for `n` observations of `p` variables:
///
/// * `ordered`: `K = 3`, `d = n/2`.
/// * `complete`: `K = 1.1`, `d = ⌊n / (2.5 (2 + (log(p/n) ∨ 0)))⌋`.
/// * `fast`: `K = 1.1`, `k = 8`, `D = d = ⌊n / (2.5 (2 + log(n ∧ p)))⌋`,
///   prefix builder.
/// * `banded`: `kmax = min(n/2, p - 1)`, 50 splits.
/// * `ledoit`: no centering.
/// * `oracle`: risk oracle over the ordered collection with `d = n/2`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub penalty_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub max_active: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builder: Option<BuilderName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standardize: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor_at_n: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kmax: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub splits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collection: Option<CollectionName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleKind>,
}

/// Oracle collections.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OracleCollection {
    Ordered { max_dim: usize },
    Complete { max_dim: usize, budget: u128 },
}

/// An estimator with every parameter resolved.
#[derive(Clone, Debug, PartialEq)]
pub enum Estimator {
    Ordered {
        penalty: PenaltySpec,
        max_dim: usize,
    },
    Complete {
        penalty: PenaltySpec,
        max_dim: usize,
    },
    Fast(TwoStageConfig),
    Banded {
        kmax: usize,
        splits: usize,
    },
    Ledoit {
        center: bool,
    },
    Oracle {
        collection: OracleCollection,
        kind: OracleKind,
    },
}

pub const DEFAULT_SPLITS: usize = 50;

impl EstimatorConfig {
    pub fn of(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn label(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| self.method.name().to_string())
    }

    /// Checks the fields against the method and fills in defaults. `at`
    /// prefixes the field names in error messages.
    pub fn resolve(&self, n: usize, p: usize, at: &str) -> Result<Estimator> {
        let method = self.method;
        let allowed: &[&str] = match method {
            Method::Ordered => &["K", "d"],
            Method::Complete => &["K", "d", "floor_at_n"],
            Method::Fast => &["K", "d", "k", "D", "builder", "standardize", "floor_at_n"],
            Method::Banded => &["kmax", "splits"],
            Method::Ledoit => &["center"],
            Method::Oracle => &["d", "collection", "oracle"],
        };
        for (name, set) in self.set_fields() {
            if set && !allowed.contains(&name) {
                return Err(field(
                    &format!("{at}.{name}"),
                    format!("not a parameter of method {}", method.name()),
                ));
            }
        }
        let limit = n.saturating_sub(2);
        let check_d = |d: usize| -> Result<usize> {
            if d > limit {
                return Err(field(
                    &format!("{at}.d"),
                    format!("{d} exceeds n - 2 = {limit}"),
                ));
            }
            Ok(d)
        };
        let penalty = |default_k: f64, kind: PenaltyKind| -> Result<PenaltySpec> {
            let k = self.penalty_k.unwrap_or(default_k);
            PenaltySpec::new(kind, k)
                .map_err(|_| field(&format!("{at}.K"), format!("must exceed 1, got {k}")))
        };
        let complete_kind = PenaltyKind::Complete {
            floor_at_n: self.floor_at_n.unwrap_or(false),
        };
        Ok(match method {
            Method::Ordered => Estimator::Ordered {
                penalty: penalty(3.0, PenaltyKind::Ordered)?,
                max_dim: check_d(self.d.unwrap_or(default_ordered_dim(n)))?,
            },
            Method::Complete => Estimator::Complete {
                penalty: penalty(1.1, complete_kind)?,
                max_dim: check_d(self.d.unwrap_or(default_complete_dim(n, p)))?,
            },
            Method::Fast => {
                let d = check_d(self.d.unwrap_or(default_fast_dim(n, p)))?;
                let k = self.k.unwrap_or(8);
                if k > MAX_POWER_SET_WIDTH {
                    return Err(field(
                        &format!("{at}.k"),
                        format!("{k} exceeds {MAX_POWER_SET_WIDTH}"),
                    ));
                }
                let max_active = self.max_active.unwrap_or(d);
                let builder = match self.builder.unwrap_or_default() {
                    BuilderName::Prefix => Builder::Prefix,
                    BuilderName::Subsets => Builder::Subsets,
                };
                Estimator::Fast(TwoStageConfig {
                    k,
                    max_active,
                    builder,
                    penalty: penalty(1.1, complete_kind)?,
                    max_dim: d,
                    standardize: self.standardize.unwrap_or(false),
                })
            }
            Method::Banded => {
                let kmax = self.kmax.unwrap_or((n / 2).min(p - 1));
                if kmax > n / 2 {
                    return Err(field(
                        &format!("{at}.kmax"),
                        format!("{kmax} exceeds n/2 = {}", n / 2),
                    ));
                }
                let splits = self.splits.unwrap_or(DEFAULT_SPLITS);
                if splits == 0 {
                    return Err(field(&format!("{at}.splits"), "must be positive"));
                }
                Estimator::Banded { kmax, splits }
            }
            Method::Ledoit => Estimator::Ledoit {
                center: self.center.unwrap_or(false),
            },
            Method::Oracle => {
                let collection = match self.collection.unwrap_or_default() {
                    CollectionName::Ordered => OracleCollection::Ordered {
                        max_dim: check_d(self.d.unwrap_or(default_ordered_dim(n)))?,
                    },
                    CollectionName::Complete => OracleCollection::Complete {
                        max_dim: check_d(self.d.unwrap_or(default_complete_dim(n, p)))?,
                        budget: DEFAULT_COMPLETE_BUDGET,
                    },
                };
                Estimator::Oracle {
                    collection,
                    kind: self.oracle.unwrap_or_default(),
                }
            }
        })
    }

    fn set_fields(&self) -> [(&'static str, bool); 12] {
        [
            ("K", self.penalty_k.is_some()),
            ("d", self.d.is_some()),
            ("k", self.k.is_some()),
            ("D", self.max_active.is_some()),
            ("builder", self.builder.is_some()),
            ("standardize", self.standardize.is_some()),
            ("floor_at_n", self.floor_at_n.is_some()),
            ("center", self.center.is_some()),
            ("kmax", self.kmax.is_some()),
            ("splits", self.splits.is_some()),
            ("collection", self.collection.is_some()),
            ("oracle", self.oracle.is_some()),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub n: usize,
    pub replicates: usize,
    /// `N₁`, the number of matrices drawn for a random scheme.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<usize>,
    #[serde(default)]
    pub fdr: FdrName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub scheme: SchemeConfig,
    pub estimators: Vec<EstimatorConfig>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            BenchError::Config(msg) => BenchError::Config(format!("{}: {msg}", path.display())),
            e => e,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(field("replicates", "must be at least 1"));
        }
        if self.n < 4 {
            return Err(field("n", format!("must be at least 4, got {}", self.n)));
        }
        self.scheme.validate()?;
        if self.estimators.is_empty() {
            return Err(field("estimators", "at least one estimator is required"));
        }
        if let Some(m) = self.matrices {
            if m == 0 || !self.replicates.is_multiple_of(m) {
                return Err(field(
                    "matrices",
                    format!("{m} does not divide replicates = {}", self.replicates),
                ));
            }
            if !self.scheme.kind.is_random() && m != 1 {
                return Err(field(
                    "matrices",
                    "omega1 is deterministic; only 1 is allowed",
                ));
            }
        }
        let mut labels = std::collections::BTreeSet::new();
        for (i, e) in self.estimators.iter().enumerate() {
            e.resolve(self.n, self.scheme.p, &format!("estimators[{i}]"))?;
            if !labels.insert(e.label()) {
                return Err(field(
                    &format!("estimators[{i}].name"),
                    format!("duplicate label {:?}", e.label()),
                ));
            }
        }
        Ok(())
    }

    pub fn estimators(&self) -> Result<Vec<Estimator>> {
        self.estimators
            .iter()
            .enumerate()
            .map(|(i, e)| e.resolve(self.n, self.scheme.p, &format!("estimators[{i}]")))
            .collect()
    }

    /// `(N₁, N₂)`. A random scheme defaults to ten matrices when ten divide
    /// the replicate count, and to one matrix per replicate otherwise.
    pub fn nesting(&self) -> (usize, usize) {
        let n1 = match self.matrices {
            Some(m) => m,
            None if !self.scheme.kind.is_random() => 1,
            None if self.replicates.is_multiple_of(10) => 10,
            None => self.replicates,
        };
        (n1, self.replicates / n1)
    }

    /// SHA-256 of the canonical form, without the output path.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = None;
        Sha256::digest(canonical.to_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

fn field(name: &str, msg: impl std::fmt::Display) -> BenchError {
    BenchError::Config(format!("field `{}`: {msg}", name.trim_start_matches('.')))
}
