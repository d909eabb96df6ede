use std::fs;
use std::path::Path;
use std::process::Command;

use choselect::losses::risk_term;
use choselect::{kullback, sample, CholeskyPair, DenseMatrix, PrecisionMatrix};
use choselect_bench::cli::{benchmark_into, cmd_estimate, EstimateArgs, MethodFlags};
use choselect_bench::config::{
    CollectionName, EstimatorConfig, ExperimentConfig, FdrName, Method, OracleKind, SchemeConfig,
    SchemeKind,
};
use choselect_bench::io::{data_csv, read_data, read_matrix};
use choselect_bench::runner::{generate_truth, matrix_seed, run_benchmark};
use choselect_bench::BenchError;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use tempfile::tempdir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_choselect"))
}

fn experiment(
    kind: SchemeKind,
    p: usize,
    n: usize,
    replicates: usize,
    estimators: Vec<EstimatorConfig>,
) -> ExperimentConfig {
    ExperimentConfig {
        seed: 3,
        n,
        replicates,
        matrices: None,
        fdr: FdrName::default(),
        output: None,
        scheme: SchemeConfig {
            kind,
            p,
            esp: matches!(kind, SchemeKind::Omega1c | SchemeKind::Omega2c).then_some(1.0),
            blocks: None,
        },
        estimators,
    }
}

fn normal_csv(path: &Path, n: usize, p: usize, seed: u64) {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut out = String::new();
    for _ in 0..n {
        let row: Vec<String> = (0..p)
            .map(|_| {
                let v: f64 = StandardNormal.sample(&mut rng);
                format!("{v:?}")
            })
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out).unwrap();
}

fn flags(method: Method) -> MethodFlags {
    MethodFlags {
        method,
        penalty_k: None,
        d: None,
        k: None,
        max_active: None,
        builder: None,
        standardize: false,
        kmax: None,
        splits: None,
    }
}

#[test]
fn config_roundtrips_through_toml() {
    let mut fast = EstimatorConfig::of(Method::Fast);
    fast.penalty_k = Some(2.5);
    fast.k = Some(6);
    fast.name = Some("fast-2.5".into());
    let mut oracle = EstimatorConfig::of(Method::Oracle);
    oracle.collection = Some(CollectionName::Complete);
    oracle.oracle = Some(OracleKind::Loss);
    oracle.d = Some(3);
    let mut config = experiment(
        SchemeKind::Omega2c,
        20,
        60,
        20,
        vec![EstimatorConfig::of(Method::Ordered), fast, oracle],
    );
    config.matrices = Some(5);
    config.output = Some("somewhere".into());
    let back = ExperimentConfig::from_toml(&config.to_toml()).unwrap();
    assert_eq!(back, config);
    assert_eq!(back.hash(), config.hash());
    config.output = None;
    assert_eq!(back.hash(), config.hash());
}

#[test]
fn config_errors_name_the_place() {
    let base = "seed = 1\nn = 50\nreplicates = 2\n[scheme]\nkind = \"omega1\"\np = 8\n";
    let unknown = format!("{base}[[estimators]]\nmethod = \"ordered\"\nwidth = 3\n");
    let msg = ExperimentConfig::from_toml(&unknown)
        .unwrap_err()
        .to_string();
    assert!(msg.contains("line 9") && msg.contains("width"), "{msg}");

    let bad_k = format!("{base}[[estimators]]\nmethod = \"ordered\"\nK = 0.5\n");
    let err = ExperimentConfig::from_toml(&bad_k).unwrap_err();
    assert!(matches!(err, BenchError::Config(_)));
    assert!(err.to_string().contains("estimators[0].K"), "{err}");

    let wrong_field = format!("{base}[[estimators]]\nmethod = \"ledoit\"\nd = 3\n");
    assert!(ExperimentConfig::from_toml(&wrong_field)
        .unwrap_err()
        .to_string()
        .contains("estimators[0].d"));
}

#[test]
fn single_replicate_has_no_interval() {
    let dir = tempdir().unwrap();
    let config = experiment(
        SchemeKind::Omega1,
        8,
        40,
        1,
        vec![EstimatorConfig::of(Method::Ordered)],
    );
    let report = benchmark_into(&config, dir.path()).unwrap();
    let kl = &report.estimators[0].metrics["kullback"];
    assert_eq!((kl.half_width, kl.count), (None, 1));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(json["estimators"][0]["metrics"]["kullback"]["half_width"].is_null());
    assert!(fs::read_to_string(dir.path().join("report.txt"))
        .unwrap()
        .contains("(n/a)"));
}

#[test]
fn report_means_match_raw_losses() {
    let dir = tempdir().unwrap();
    let config = experiment(
        SchemeKind::Omega1c,
        12,
        50,
        20,
        vec![
            EstimatorConfig::of(Method::Complete),
            EstimatorConfig::of(Method::Ledoit),
        ],
    );
    let report = benchmark_into(&config, dir.path()).unwrap();
    let mut reader = csv::Reader::from_path(dir.path().join("raw_losses.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 40);
    for e in &report.estimators {
        for (metric, summary) in &e.metrics {
            let col = headers.iter().position(|h| h == metric).unwrap();
            let values: Vec<f64> = rows
                .iter()
                .filter(|r| r[2] == e.name)
                .filter(|r| !r[col].is_empty())
                .map(|r| r[col].parse().unwrap())
                .collect();
            assert_eq!(values.len(), summary.count);
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            assert!(
                (mean - summary.mean).abs() <= 1e-12 * mean.abs().max(1.0),
                "{} {metric}",
                e.name
            );
            let var =
                values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
            let hw = 1.96 * var.sqrt() / (values.len() as f64).sqrt();
            assert!((hw - summary.half_width.unwrap()).abs() <= 1e-12 * hw.max(1.0));
        }
    }
    assert!(!report.estimators[1].metrics.contains_key("power"));
}

#[test]
fn exit_codes_follow_the_error_class() {
    let dir = tempdir().unwrap();
    let ragged = dir.path().join("ragged.csv");
    fs::write(&ragged, "1,2,3\n4,5\n").unwrap();
    let status = bin()
        .args(["estimate"])
        .arg(&ragged)
        .arg("--out")
        .arg(dir.path().join("a"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "seed = 1\nn = 50\nreplicates = 0\n[scheme]\nkind = \"omega1\"\np = 8\n[[estimators]]\nmethod = \"ordered\"\n").unwrap();
    let out = bin().arg("benchmark").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("replicates"));

    let wide = dir.path().join("wide.csv");
    normal_csv(&wide, 100, 40, 1);
    let status = bin()
        .arg("estimate")
        .arg(&wide)
        .args(["--method", "complete", "--d", "20", "--out"])
        .arg(dir.path().join("b"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));

    let status = bin()
        .args([
            "oracle", "--scheme", "omega1", "--p", "5", "--n", "20", "--data",
        ])
        .arg(&wide)
        .arg("--out")
        .arg(dir.path().join("c"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(5));
}

#[test]
fn estimate_files_reload_exactly() {
    let dir = tempdir().unwrap();
    let input = dir.path().join("x.csv");
    normal_csv(&input, 60, 6, 7);
    for method in [
        Method::Ordered,
        Method::Complete,
        Method::Fast,
        Method::Banded,
        Method::Ledoit,
    ] {
        let out = dir.path().join(method.name());
        let fit = cmd_estimate(&EstimateArgs {
            input: input.clone(),
            flags: flags(method),
            center: false,
            seed: 1,
            out: out.clone(),
        })
        .unwrap();
        assert_eq!(
            &read_matrix(&out.join("omega.csv")).unwrap(),
            fit.precision.matrix()
        );
        assert_eq!(&read_matrix(&out.join("T.csv")).unwrap(), fit.pair.t());
        assert_eq!(out.join("edges.csv").exists(), fit.graph.is_some());
    }
}

#[test]
fn null_data_gives_few_edges() {
    let dir = tempdir().unwrap();
    let mut sparse = 0;
    for seed in 0..20 {
        let input = dir.path().join(format!("x{seed}.csv"));
        normal_csv(&input, 100, 5, 100 + seed);
        let mut f = flags(Method::Complete);
        f.penalty_k = Some(2.5);
        let args = EstimateArgs {
            input,
            flags: f,
            center: false,
            seed: 0,
            out: dir.path().join(format!("o{seed}")),
        };
        let fit = cmd_estimate(&args).unwrap();
        let edges = fs::read_to_string(args.out.join("edges.csv"))
            .unwrap()
            .lines()
            .count()
            - 1;
        assert_eq!(edges, fit.graph.unwrap().edge_count());
        if edges <= 2 {
            sparse += 1;
        }
    }
    assert!(sparse >= 18, "{sparse} of 20");
}

#[test]
fn loss_oracle_dominates_every_replicate() {
    let d = 5;
    let mut ordered = EstimatorConfig::of(Method::Ordered);
    ordered.d = Some(d);
    let mut oracle = EstimatorConfig::of(Method::Oracle);
    oracle.oracle = Some(OracleKind::Loss);
    oracle.d = Some(d);
    let config = experiment(SchemeKind::Omega2, 20, 60, 30, vec![ordered, oracle]);
    let run = run_benchmark(&config).unwrap();
    for r in 0..30 {
        let kl = |e: usize| {
            run.records
                .iter()
                .find(|x| x.replicate == r && x.estimator == e)
                .unwrap()
                .metrics
                .kullback
        };
        assert!(
            kl(1) <= kl(0) + 1e-9,
            "replicate {r}: {} > {}",
            kl(1),
            kl(0)
        );
    }
}

#[test]
fn empty_collection_oracle_is_the_null_model() {
    let (p, n) = (10, 50);
    let mut oracle = EstimatorConfig::of(Method::Oracle);
    oracle.d = Some(0);
    let config = experiment(SchemeKind::Omega1, p, n, 400, vec![oracle]);
    let run = run_benchmark(&config).unwrap();
    let truth = generate_truth(&config.scheme, matrix_seed(config.seed, 0)).unwrap();
    let sigma = truth.precision.covariance().unwrap();
    let null = PrecisionMatrix::new(DenseMatrix::from_fn(p, p, |i, j| {
        if i == j {
            1.0 / sigma[(i, i)]
        } else {
            0.0
        }
    }))
    .unwrap();
    let expected = kullback(&truth.precision, &null).unwrap() + p as f64 * risk_term(n, 0).unwrap();
    let analytic = run.analytic_risks[0].unwrap();
    assert!(
        (analytic - expected).abs() < 1e-9 * expected,
        "{analytic} vs {expected}"
    );

    let losses: Vec<f64> = run.records.iter().map(|r| r.metrics.kullback).collect();
    let mean = losses.iter().sum::<f64>() / 400.0;
    let se = (losses.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 399.0 / 400.0).sqrt();
    assert!(
        (mean - expected).abs() < 3.0 * se,
        "{mean} vs {expected} (se {se})"
    );
    assert!(run.records.iter().all(|r| r.metrics.power == Some(0.0)));
}

#[test]
fn simulate_then_estimate() {
    let dir = tempdir().unwrap();
    for binary in [false, true] {
        let out = dir.path().join(if binary { "bin" } else { "csv" });
        let mut cmd = bin();
        cmd.args([
            "simulate", "--scheme", "omega2c", "--p", "15", "--n", "80", "--esp", "1.5", "--seed",
            "4", "--out",
        ])
        .arg(&out);
        if binary {
            cmd.arg("--binary");
        }
        assert!(cmd.status().unwrap().success());
        let data = out.join(if binary { "data.chsl" } else { "data.csv" });
        let x = read_data(&data).unwrap();
        assert_eq!((x.n(), x.p()), (80, 15));
        assert_eq!(
            fs::read_to_string(out.join("displaced.csv"))
                .unwrap()
                .lines()
                .count(),
            10
        );
        let status = bin()
            .arg("estimate")
            .arg(&data)
            .args(["--method", "fast", "--out"])
            .arg(out.join("fit"))
            .status()
            .unwrap();
        assert!(status.success());
        assert!(out.join("fit").join("edges.csv").exists());
    }
    let csv = read_data(&dir.path().join("csv/data.csv")).unwrap();
    let chsl = read_data(&dir.path().join("bin/data.chsl")).unwrap();
    assert_eq!(csv.columns(), chsl.columns());
}

#[test]
fn written_data_reads_back() {
    let dir = tempdir().unwrap();
    let x = sample(&CholeskyPair::<f64>::identity(4), 25, 9).unwrap();
    let path = dir.path().join("x.csv");
    fs::write(&path, data_csv(&x)).unwrap();
    assert_eq!(read_data(&path).unwrap().columns(), x.columns());
}
