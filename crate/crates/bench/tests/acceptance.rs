//! Acceptance run: one PASS/FAIL line per criterion, then a nonzero exit if
//! any criterion failed. All experiments use master seed 1.

#![allow(clippy::needless_range_loop)]

use std::time::{Duration, Instant};

use choselect::lasso::{lars_path, LarsOptions};
use choselect::losses::{kullback, project_row};
use choselect::rng::{generator, substream};
use choselect::selection::complete_collection_size;
use choselect::simgen::gen_omega1c;
use choselect::{
    assemble, choselect, choselect_fast, conditional_kullback, decompose, fit_row, risk_term,
    sample, Builder, CholeskyPair, CollectionSpec, Data, DenseMatrix, PenaltySpec, TwoStageConfig,
};
use choselect_bench::cli::benchmark_into;
use choselect_bench::config::{
    EstimatorConfig, ExperimentConfig, FdrName, Method, OracleKind, SchemeConfig, SchemeKind,
};
use choselect_bench::report::BenchmarkReport;
use rand::Rng;
use rand_distr::StandardNormal;

const SEED: u64 = 1;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, u64, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 chain rule of the Kullback loss", 10, chain_rule),
        ("2 risk identity of the per-row fit", 120, risk_identity),
        ("3 bracketing of R(n,d)", 1, bracketing),
        ("4 omega1 ordered selection vs oracle", 300, omega1),
        ("5 omega2 ordered selection and recovery", 300, omega2),
        (
            "6 two-stage vs exhaustive on omega1c",
            600,
            two_stage_vs_complete,
        ),
        ("7 graph recovery on omega1c p=50", 900, recovery),
        ("8 LARS stationarity and endpoint", 30, lars_kkt),
        (
            "9 full two-stage collections equal exhaustive",
            120,
            exhaustive_equivalence,
        ),
        (
            "10 roundtrip and report determinism",
            30,
            roundtrip_determinism,
        ),
    ];
    let mut failed = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(limit);
        let pass = outcome.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "[{}] criterion {name}: {} ({:.1} s, limit {limit} s)",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn random_pair(p: usize, rng: &mut impl Rng) -> CholeskyPair<f64> {
    let t = DenseMatrix::from_fn(p, p, |i, j| match j.cmp(&i) {
        std::cmp::Ordering::Less => rng.random_range(-0.8..0.8),
        std::cmp::Ordering::Equal => 1.0,
        std::cmp::Ordering::Greater => 0.0,
    });
    let s = (0..p).map(|_| rng.random_range(0.3..3.0)).collect();
    CholeskyPair::new(t, s).unwrap()
}

fn chain_rule() -> Outcome {
    let mut rng = generator(substream(SEED, 0, 100));
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = rng.random_range(1..=20);
        let a = random_pair(p, &mut rng);
        let b = random_pair(p, &mut rng);
        let omega = a.precision();
        let sigma = omega.covariance().unwrap();
        let total = kullback(&omega, &b.precision()).unwrap();
        let sum: f64 = (0..p)
            .map(|i| {
                let idx: Vec<usize> = (0..i).collect();
                let head = sigma.select(&idx, &idx);
                conditional_kullback(
                    a.row_coefficients(i),
                    a.s()[i],
                    b.row_coefficients(i),
                    b.s()[i],
                    &head,
                )
            })
            .sum();
        worst = worst.max((total - sum).abs());
    }
    Outcome {
        pass: worst <= 1e-8,
        detail: format!("max |K - sum of row terms| = {worst:.2e} <= 1e-8 over 100 pairs"),
    }
}

fn risk_identity() -> Outcome {
    let (p, n, reps) = (5, 50, 10_000);
    let pair = choselect::simgen::gen_omega1::<f64>(p).unwrap();
    let sigma = pair.precision().covariance().unwrap();
    let mut sums = vec![(0.0, 0.0); p];
    for r in 0..reps {
        let x = sample(&pair, n, substream(SEED, r, 200)).unwrap();
        for (i, acc) in sums.iter_mut().enumerate() {
            let model: Vec<usize> = (0..i).collect();
            let fit = fit_row(&x, i, &model).unwrap();
            let head = sigma.select(&model, &model);
            let loss = conditional_kullback(
                pair.row_coefficients(i),
                pair.s()[i],
                &fit.dense_coefficients(i),
                fit.residual_variance,
                &head,
            );
            acc.0 += loss;
            acc.1 += loss * loss;
        }
    }
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for (i, (s, s2)) in sums.iter().enumerate() {
        let mean = s / reps as f64;
        let sd = ((s2 / reps as f64 - mean * mean) * reps as f64 / (reps - 1) as f64).sqrt();
        let se = sd / (reps as f64).sqrt();
        let model: Vec<usize> = (0..i).collect();
        let (t, sv) = project_row(&sigma, i, &model).unwrap();
        let head = sigma.select(&model, &model);
        let bias = conditional_kullback(pair.row_coefficients(i), pair.s()[i], &t, sv, &head);
        let expected = bias + risk_term(n, i).unwrap();
        let z = (mean - expected).abs() / se;
        worst = worst.max(z);
        pass &= z <= 3.0;
    }
    Outcome {
        pass,
        detail: format!("largest |mean - (bias + R)| = {worst:.2} SE <= 3 SE over 5 rows"),
    }
}

fn bracketing() -> Outcome {
    let mut violations = 0;
    let mut checked = 0;
    for n in 10..=200usize {
        for d in 0..=n - 3 {
            let r = risk_term(n, d).unwrap();
            let a = (d + 1) as f64 / (n - d - 2) as f64;
            if !(0.5 * a <= r && r <= a + 0.5 * a * a) {
                violations += 1;
            }
            checked += 1;
        }
    }
    Outcome {
        pass: violations == 0,
        detail: format!("{violations} violations among {checked} (n, d) pairs"),
    }
}

fn experiment(
    kind: SchemeKind,
    p: usize,
    esp: Option<f64>,
    replicates: usize,
    estimators: Vec<EstimatorConfig>,
) -> BenchmarkReport {
    let config = ExperimentConfig {
        seed: SEED,
        n: 100,
        replicates,
        matrices: None,
        fdr: FdrName::FalseOverTotal,
        output: None,
        scheme: SchemeConfig {
            kind,
            p,
            esp,
            blocks: (kind == SchemeKind::Omega2).then_some(1),
        },
        estimators,
    };
    let dir = tempfile::tempdir().unwrap();
    let report = benchmark_into(&config, dir.path()).unwrap();
    eprint!("{}", report.to_table());
    report
}

fn named(method: Method, name: &str) -> EstimatorConfig {
    EstimatorConfig {
        name: Some(name.into()),
        ..EstimatorConfig::of(method)
    }
}

fn mean(report: &BenchmarkReport, estimator: &str, metric: &str) -> f64 {
    let e = report
        .estimators
        .iter()
        .find(|e| e.name == estimator)
        .unwrap();
    e.metrics[metric].mean
}

fn omega1() -> Outcome {
    let report = experiment(
        SchemeKind::Omega1,
        30,
        None,
        100,
        vec![
            EstimatorConfig {
                penalty_k: Some(3.0),
                d: Some(50),
                ..named(Method::Ordered, "choselect")
            },
            EstimatorConfig {
                d: Some(50),
                ..named(Method::Oracle, "oracle")
            },
            EstimatorConfig {
                d: Some(50),
                oracle: Some(OracleKind::Loss),
                ..named(Method::Oracle, "loss_oracle")
            },
        ],
    );
    let (a, o, lo) = (
        mean(&report, "choselect", "kullback"),
        mean(&report, "oracle", "kullback"),
        mean(&report, "loss_oracle", "kullback"),
    );
    let ratio = a / o;
    let pass = (0.8..=1.3).contains(&a) && (0.6..=1.0).contains(&o) && ratio <= 1.5;
    Outcome {
        pass,
        detail: format!(
            "choselect {a:.3} in [0.8, 1.3], oracle {o:.3} in [0.6, 1.0], ratio {ratio:.3} <= 1.5 \
             (per-replicate loss oracle {lo:.3}; ratio vs 1.4: {})",
            if ratio <= 1.4 { "within" } else { "above" }
        ),
    }
}

fn omega2() -> Outcome {
    let report = experiment(
        SchemeKind::Omega2,
        30,
        None,
        100,
        vec![EstimatorConfig {
            penalty_k: Some(3.0),
            d: Some(50),
            ..named(Method::Ordered, "choselect")
        }],
    );
    let (k, power, fdr) = (
        mean(&report, "choselect", "kullback"),
        mean(&report, "choselect", "power"),
        mean(&report, "choselect", "fdr"),
    );
    let pass = (0.9..=1.6).contains(&k) && power >= 0.95 && fdr <= 0.10;
    Outcome {
        pass,
        detail: format!(
            "Kullback {k:.3} in [0.9, 1.6], power {power:.3} >= 0.95, FDR {fdr:.3} <= 0.10"
        ),
    }
}

fn two_stage_vs_complete() -> Outcome {
    let report = experiment(
        SchemeKind::Omega1c,
        30,
        Some(1.0),
        100,
        vec![
            EstimatorConfig {
                penalty_k: Some(1.1),
                k: Some(8),
                d: Some(7),
                max_active: Some(7),
                ..named(Method::Fast, "fast")
            },
            EstimatorConfig {
                penalty_k: Some(1.1),
                d: Some(7),
                ..named(Method::Complete, "complete")
            },
        ],
    );
    let (f, c) = (
        mean(&report, "fast", "kullback"),
        mean(&report, "complete", "kullback"),
    );
    let gap = (f - c).abs() / c;
    let pass = (0.5..=0.95).contains(&f) && (0.5..=0.95).contains(&c) && gap <= 0.15;
    Outcome {
        pass,
        detail: format!(
            "fast {f:.3}, complete {c:.3} in [0.5, 0.95], relative gap {gap:.3} <= 0.15"
        ),
    }
}

fn recovery() -> Outcome {
    let report = experiment(
        SchemeKind::Omega1c,
        50,
        Some(1.0),
        50,
        vec![EstimatorConfig {
            penalty_k: Some(2.5),
            ..named(Method::Fast, "fast")
        }],
    );
    let (power, fdr) = (mean(&report, "fast", "power"), mean(&report, "fast", "fdr"));
    let pass = fdr <= 0.15 && power >= 0.30;
    Outcome {
        pass,
        detail: format!("FDR {fdr:.3} <= 0.15, power {power:.3} >= 0.30"),
    }
}

fn lars_kkt() -> Outcome {
    let mut rng = generator(substream(SEED, 0, 800));
    let (mut kkt, mut endpoint): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let (n, q) = (80, rng.random_range(1..=15));
        let mut cols: Vec<Vec<f64>> = (0..q)
            .map(|_| (0..n).map(|_| normal(&mut rng)).collect())
            .collect();
        for j in 1..q {
            let prev = cols[j - 1].clone();
            for (v, p) in cols[j].iter_mut().zip(prev) {
                *v += 0.6 * p;
            }
        }
        let beta: Vec<f64> = (0..q)
            .map(|j| {
                if j % 2 == 0 {
                    rng.random_range(-2.0..2.0)
                } else {
                    0.0
                }
            })
            .collect();
        let y: Vec<f64> = (0..n)
            .map(|i| {
                1.5 + cols.iter().zip(&beta).map(|(c, b)| c[i] * b).sum::<f64>() + normal(&mut rng)
            })
            .collect();
        let x = Data::from_columns(cols.clone()).unwrap();
        let path = lars_path(&x, &y, &LarsOptions::new(q)).unwrap();

        let xc = x.centered();
        let ym = y.iter().sum::<f64>() / n as f64;
        let yc: Vec<f64> = y.iter().map(|v| v - ym).collect();
        for (event, b) in path.events.iter().zip(&path.coefficients) {
            let resid: Vec<f64> = (0..n)
                .map(|i| yc[i] - (0..q).map(|j| xc.column(j)[i] * b[j]).sum::<f64>())
                .collect();
            for j in 0..q {
                let g: f64 = xc.column(j).iter().zip(&resid).map(|(a, r)| a * r).sum();
                let err = if b[j] != 0.0 {
                    (g - event.knot * b[j].signum()).abs()
                } else {
                    (g.abs() - event.knot).max(0.0)
                };
                kkt = kkt.max(err);
            }
        }
        // least squares with an intercept: regress y on [1, X] through the QR row fit
        let mut aug = vec![vec![1.0; n]];
        aug.extend(cols);
        aug.push(y.iter().map(|v| -v).collect());
        let aug = Data::from_columns(aug).unwrap();
        let ls = fit_row(&aug, q + 1, &(0..=q).collect::<Vec<_>>()).unwrap();
        let terminal = path.terminal.expect("full path");
        for j in 0..q {
            endpoint = endpoint.max((terminal[j] - ls.coefficients[j + 1]).abs());
        }
    }
    Outcome {
        pass: kkt <= 1e-6 && endpoint <= 1e-8,
        detail: format!("max stationarity violation {kkt:.2e} <= 1e-6, endpoint gap {endpoint:.2e} <= 1e-8 on 50 problems"),
    }
}

fn exhaustive_equivalence() -> Outcome {
    let (p, n, d) = (12, 100, 4);
    let mut equal = 0;
    let mut full = 0;
    for seed in 0..20 {
        let (pair, _) = gen_omega1c::<f64>(p, 1.0, substream(SEED, seed, 900)).unwrap();
        let x = sample(&pair, n, substream(SEED, seed, 901)).unwrap();
        let cfg = TwoStageConfig {
            k: p - 1,
            max_active: p - 1,
            builder: Builder::Prefix,
            penalty: PenaltySpec::complete(1.1).unwrap(),
            max_dim: d,
            standardize: false,
        };
        let fast = choselect_fast(&x, &cfg).unwrap();
        let exhaustive = choselect(&x, &CollectionSpec::complete(d), &cfg.penalty).unwrap();
        if (0..p).all(|i| fast.collection_sizes[i] as u128 == complete_collection_size(i, d)) {
            full += 1;
        }
        if fast.fit.graph == exhaustive.graph && fast.fit.pair == exhaustive.pair {
            equal += 1;
        }
    }
    Outcome {
        pass: equal == 20 && full == 20,
        detail: format!(
            "{equal}/20 identical graphs and fits, {full}/20 runs with full collections"
        ),
    }
}

fn roundtrip_determinism() -> Outcome {
    let mut rng = generator(substream(SEED, 0, 1000));
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let p = rng.random_range(1..=25);
        let pair = random_pair(p, &mut rng);
        let back = decompose(&assemble(&pair)).unwrap();
        let t = back.t().sub(pair.t()).max_abs();
        let s = back
            .s()
            .iter()
            .zip(pair.s())
            .map(|(a, b)| (a - b).abs() / b)
            .fold(0.0, f64::max);
        worst = worst.max(t).max(s);
    }

    let config = ExperimentConfig {
        seed: SEED,
        n: 60,
        replicates: 20,
        matrices: None,
        fdr: FdrName::FalseOverTotal,
        output: None,
        scheme: SchemeConfig {
            kind: SchemeKind::Omega2c,
            p: 15,
            esp: Some(1.5),
            blocks: None,
        },
        estimators: vec![
            EstimatorConfig::of(Method::Ordered),
            EstimatorConfig {
                d: Some(4),
                ..EstimatorConfig::of(Method::Complete)
            },
            EstimatorConfig::of(Method::Fast),
            EstimatorConfig {
                splits: Some(5),
                ..EstimatorConfig::of(Method::Banded)
            },
            EstimatorConfig::of(Method::Ledoit),
            EstimatorConfig::of(Method::Oracle),
        ],
    };
    let files = ["report.json", "report.csv", "raw_losses.csv"];
    let read_all = |dir: &std::path::Path| -> Vec<Vec<u8>> {
        files
            .iter()
            .map(|f| std::fs::read(dir.join(f)).unwrap())
            .collect()
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    benchmark_into(&config, a.path()).unwrap();
    benchmark_into(&config, b.path()).unwrap();
    let identical = read_all(a.path()) == read_all(b.path());
    let c = tempfile::tempdir().unwrap();
    benchmark_into(
        &ExperimentConfig {
            seed: SEED + 1,
            ..config
        },
        c.path(),
    )
    .unwrap();
    let seed_matters = read_all(a.path())[2] != read_all(c.path())[2];
    Outcome {
        pass: worst <= 1e-10 && identical && seed_matters,
        detail: format!(
            "roundtrip error {worst:.2e} <= 1e-10; identical seeds give {} reports; another seed {}",
            if identical { "byte-identical" } else { "DIFFERENT" },
            if seed_matters { "changes the raw losses" } else { "gives the SAME raw losses" }
        ),
    }
}
