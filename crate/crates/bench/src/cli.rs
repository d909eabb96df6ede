use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use choselect::{CholeskyPair, DenseMatrix};
use clap::{Args, Parser, Subcommand};

use crate::config::{
    BuilderName, CollectionName, EstimatorConfig, ExperimentConfig, FdrName, Method, OracleKind,
    SchemeConfig, SchemeKind,
};
use crate::error::{BenchError, Result};
use crate::estimators::{estimate, Estimate};
use crate::io::{
    data_csv, edges_csv, encode_binary, ensure_dir, matrix_csv, number, read_data, write_atomic,
};
use crate::report::{write_reports, BenchmarkReport, Timing};
use crate::runner::{generate_truth, matrix_seed, run_benchmark, sample_seed};

#[derive(Debug, Parser)]
#[command(
    name = "choselect",
    version,
    about = "Precision matrix estimation by Cholesky model selection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a precision matrix from a data file.
    Estimate(EstimateArgs),
    /// Run a simulation experiment described by a TOML file.
    Benchmark(BenchmarkArgs),
    /// Risk of the oracle model on a simulation scheme.
    Oracle(OracleArgs),
    /// Write a dataset drawn from a simulation scheme.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct MethodFlags {
    #[arg(long, value_enum, default_value = "ordered")]
    pub method: Method,
    /// Penalty constant.
    #[arg(long = "K")]
    pub penalty_k: Option<f64>,
    /// Largest model dimension.
    #[arg(long = "d")]
    pub d: Option<usize>,
    /// Power-set width of the two-stage collections.
    #[arg(long = "k")]
    pub k: Option<usize>,
    /// Number of variables the Lasso path may hold.
    #[arg(long = "D")]
    pub max_active: Option<usize>,
    #[arg(long, value_enum)]
    pub builder: Option<BuilderName>,
    /// Standardize the columns of the Lasso design.
    #[arg(long)]
    pub standardize: bool,
    /// Largest band of the banded estimator.
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long)]
    pub splits: Option<usize>,
}

impl MethodFlags {
    fn config(&self, center: bool) -> EstimatorConfig {
        EstimatorConfig {
            method: self.method,
            penalty_k: self.penalty_k,
            d: self.d,
            k: self.k,
            max_active: self.max_active,
            builder: self.builder,
            standardize: self.standardize.then_some(true),
            center: (self.method == Method::Ledoit && center).then_some(true),
            kmax: self.kmax,
            splits: self.splits,
            ..EstimatorConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// CSV (optional header) or CHSL1 binary file, one observation per row.
    pub input: PathBuf,
    #[command(flatten)]
    pub flags: MethodFlags,
    /// Subtract the column means first.
    #[arg(long)]
    pub center: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "estimate")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SchemeArgs {
    #[arg(long, value_enum)]
    pub scheme: SchemeName,
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub n: usize,
    /// Expected number of parents (omega1c, omega2c).
    #[arg(long)]
    pub esp: Option<f64>,
    /// Number of blocks (omega2).
    #[arg(long)]
    pub blocks: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SchemeName {
    Omega1,
    Omega2,
    Omega1c,
    Omega2c,
}

impl SchemeArgs {
    fn scheme(&self) -> SchemeConfig {
        let kind = match self.scheme {
            SchemeName::Omega1 => SchemeKind::Omega1,
            SchemeName::Omega2 => SchemeKind::Omega2,
            SchemeName::Omega1c => SchemeKind::Omega1c,
            SchemeName::Omega2c => SchemeKind::Omega2c,
        };
        SchemeConfig {
            kind,
            p: self.p,
            esp: self.esp,
            blocks: self.blocks,
        }
    }
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[arg(long, value_enum, default_value = "ordered")]
    pub collection: CollectionName,
    #[arg(long = "d")]
    pub d: Option<usize>,
    #[arg(long, value_enum, default_value = "risk")]
    pub oracle: OracleKind,
    #[arg(long, default_value_t = 100)]
    pub replicates: usize,
    #[arg(long, default_value = "oracle")]
    pub out: PathBuf,
    /// A data file carries no truth, so this is always refused.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Write the data in the CHSL1 binary layout.
    #[arg(long)]
    pub binary: bool,
    #[arg(long, default_value = "simulated")]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Estimate(args) => cmd_estimate(&args).map(|_| ()),
        Command::Benchmark(args) => {
            let report = cmd_benchmark(&args)?;
            print!("{}", report.to_table());
            Ok(())
        }
        Command::Oracle(args) => {
            let report = cmd_oracle(&args)?;
            print!("{}", report.to_table());
            if let Some(risk) = report.estimators[0].analytic_risk {
                println!("exact oracle risk: {risk:.6}");
            }
            Ok(())
        }
        Command::Simulate(args) => cmd_simulate(&args),
    }
}

pub fn cmd_estimate(args: &EstimateArgs) -> Result<Estimate> {
    let mut x = read_data(&args.input)?;
    if args.center && args.flags.method != Method::Ledoit {
        x = x.centered();
    }
    let estimator = args.flags.config(args.center).resolve(x.n(), x.p(), "")?;
    let fit = estimate(&estimator, &x, args.seed)?;
    let out = &args.out;
    ensure_dir(out)?;
    write_atomic(&out.join("T.csv"), matrix_csv(fit.pair.t()).as_bytes())?;
    let s: Vec<String> = fit.pair.s().iter().map(|&v| number(v)).collect();
    write_atomic(&out.join("S.csv"), format!("{}\n", s.join("\n")).as_bytes())?;
    write_atomic(
        &out.join("omega.csv"),
        matrix_csv(fit.precision.matrix()).as_bytes(),
    )?;
    if let Some(graph) = &fit.graph {
        write_atomic(&out.join("edges.csv"), edges_csv(graph).as_bytes())?;
    }
    let summary = estimate_summary(&fit);
    write_atomic(&out.join("summary.txt"), summary.as_bytes())?;
    print!("{summary}");
    Ok(fit)
}

fn estimate_summary(fit: &Estimate) -> String {
    let mut out = String::new();
    if fit.rows.is_empty() {
        if let Some(g) = &fit.graph {
            for (i, r) in g.rows().iter().enumerate() {
                out.push_str(&format!("row {}: size {}\n", i + 1, r.len()));
            }
        }
    } else {
        for r in &fit.rows {
            out.push_str(&format!(
                "row {}: size {} criterion {:.6} evaluated {} infeasible {}\n",
                r.row + 1,
                r.model.len(),
                r.criterion,
                r.evaluated,
                r.infeasible
            ));
        }
    }
    if let Some(g) = &fit.graph {
        out.push_str(&format!("edges: {}\n", g.edge_count()));
    }
    for note in &fit.notes {
        out.push_str(note);
        out.push('\n');
    }
    out
}

pub fn cmd_benchmark(args: &BenchmarkArgs) -> Result<BenchmarkReport> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(r) = args.replicates {
        config.replicates = r;
        if config.matrices.is_some_and(|m| r % m != 0) {
            config.matrices = None;
        }
    }
    if let Some(out) = &args.out {
        config.output = Some(out.display().to_string());
    }
    config.validate()?;
    let dir = PathBuf::from(
        config
            .output
            .clone()
            .unwrap_or_else(|| "choselect-out".into()),
    );
    benchmark_into(&config, &dir)
}

/// Runs `config` and writes its reports into `dir`.
pub fn benchmark_into(config: &ExperimentConfig, dir: &Path) -> Result<BenchmarkReport> {
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let clock = Instant::now();
    let run = run_benchmark(config)?;
    let timing = Timing {
        started_unix_seconds: started,
        wall_seconds: clock.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
    };
    write_reports(&run, dir, &timing)
}

pub fn cmd_oracle(args: &OracleArgs) -> Result<BenchmarkReport> {
    if let Some(path) = &args.data {
        return Err(BenchError::UnsupportedScheme(format!(
            "{} is a data file; oracles need a simulated truth",
            path.display()
        )));
    }
    let estimator = EstimatorConfig {
        method: Method::Oracle,
        d: args.d,
        collection: Some(args.collection),
        oracle: Some(args.oracle),
        ..EstimatorConfig::default()
    };
    let config = ExperimentConfig {
        seed: args.scheme.seed,
        n: args.scheme.n,
        replicates: args.replicates,
        matrices: None,
        fdr: FdrName::default(),
        output: Some(args.out.display().to_string()),
        scheme: args.scheme.scheme(),
        estimators: vec![estimator],
    };
    config.validate()?;
    benchmark_into(&config, &args.out)
}

/// Writes replicate 0 of the scheme: the data, the truth and its graph.
pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let scheme = args.scheme.scheme();
    scheme.validate()?;
    if args.scheme.n < 1 {
        return Err(BenchError::Config("field `n`: must be positive".into()));
    }
    let truth = generate_truth(&scheme, matrix_seed(args.scheme.seed, 0))?;
    let x = choselect::sample(&truth.pair, args.scheme.n, sample_seed(args.scheme.seed, 0))?;
    let out = &args.out;
    ensure_dir(out)?;
    if args.binary {
        write_atomic(&out.join("data.chsl"), &encode_binary(&x))?;
    } else {
        write_atomic(&out.join("data.csv"), data_csv(&x).as_bytes())?;
    }
    write_pair(out, &truth.pair, "true_")?;
    write_atomic(
        &out.join("true_omega.csv"),
        matrix_csv(truth.precision.matrix()).as_bytes(),
    )?;
    write_atomic(
        &out.join("true_edges.csv"),
        edges_csv(&truth.graph).as_bytes(),
    )?;
    if !truth.displaced.is_empty() {
        let lines: Vec<String> = truth
            .displaced
            .iter()
            .map(|i| (i + 1).to_string())
            .collect();
        write_atomic(
            &out.join("displaced.csv"),
            format!("{}\n", lines.join("\n")).as_bytes(),
        )?;
    }
    Ok(())
}

fn write_pair(dir: &Path, pair: &CholeskyPair<f64>, prefix: &str) -> Result<()> {
    write_atomic(
        &dir.join(format!("{prefix}T.csv")),
        matrix_csv(pair.t()).as_bytes(),
    )?;
    let s = DenseMatrix::from_fn(pair.p(), 1, |i, _| pair.s()[i]);
    write_atomic(
        &dir.join(format!("{prefix}S.csv")),
        matrix_csv(&s).as_bytes(),
    )
}
