#![allow(clippy::needless_range_loop)]

use choselect::lasso::{
    build_collection_prefix, build_collection_subsets, lars_path, LarsAction, LarsOptions,
};
use choselect::{fit_row, DataMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn problem(n: usize, q: usize, seed: u64) -> (DataMatrix<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<Vec<f64>> = (0..q)
        .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    // mild correlation so that drops can happen
    for j in 1..q {
        let prev = cols[j - 1].clone();
        for (v, p) in cols[j].iter_mut().zip(prev) {
            *v += 0.5 * p;
        }
    }
    let beta: Vec<f64> = (0..q)
        .map(|j| {
            if j % 3 == 0 {
                rng.random_range(-2.0..2.0)
            } else {
                0.0
            }
        })
        .collect();
    let y = (0..n)
        .map(|i| {
            cols.iter().zip(&beta).map(|(c, b)| c[i] * b).sum::<f64>()
                + rng.sample::<f64, _>(StandardNormal)
        })
        .collect();
    (DataMatrix::from_columns(cols).unwrap(), y)
}

fn centered(x: &DataMatrix<f64>, y: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let xc = x.centered().columns().to_vec();
    let m = y.iter().sum::<f64>() / y.len() as f64;
    (xc, y.iter().map(|v| v - m).collect())
}

fn gradient(xc: &[Vec<f64>], yc: &[f64], beta: &[f64]) -> Vec<f64> {
    let r: Vec<f64> = (0..yc.len())
        .map(|i| yc[i] - xc.iter().zip(beta).map(|(c, b)| c[i] * b).sum::<f64>())
        .collect();
    xc.iter()
        .map(|c| c.iter().zip(&r).map(|(a, b)| a * b).sum())
        .collect()
}

/// Coordinate descent on `½‖y - Xβ‖² + λ‖β‖₁`.
fn coordinate_descent(xc: &[Vec<f64>], yc: &[f64], lambda: f64) -> Vec<f64> {
    let q = xc.len();
    let norms: Vec<f64> = xc.iter().map(|c| c.iter().map(|v| v * v).sum()).collect();
    let mut beta = vec![0.0; q];
    let mut r = yc.to_vec();
    for _ in 0..100_000 {
        let mut change: f64 = 0.0;
        for j in 0..q {
            let rho: f64 =
                xc[j].iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() + norms[j] * beta[j];
            let new = rho.signum() * (rho.abs() - lambda).max(0.0) / norms[j];
            let delta = new - beta[j];
            if delta != 0.0 {
                for (ri, xi) in r.iter_mut().zip(&xc[j]) {
                    *ri -= delta * xi;
                }
                beta[j] = new;
                change = change.max(delta.abs());
            }
        }
        if change < 1e-13 {
            break;
        }
    }
    beta
}

#[test]
fn knots_satisfy_stationarity() {
    for seed in 0..20 {
        let (x, y) = problem(80, 12, seed);
        let path = lars_path(&x, &y, &LarsOptions::new(12)).unwrap();
        let (xc, yc) = centered(&x, &y);
        for (e, beta) in path.events.iter().zip(&path.coefficients) {
            let g = gradient(&xc, &yc, beta);
            for j in 0..12 {
                if beta[j] != 0.0 {
                    assert!(
                        (g[j] - e.knot * beta[j].signum()).abs() < 1e-6,
                        "seed {seed} step {}",
                        e.step
                    );
                } else {
                    assert!(g[j].abs() <= e.knot + 1e-6, "seed {seed} step {}", e.step);
                }
            }
        }
        for w in path.events.windows(2) {
            assert!(w[1].knot <= w[0].knot);
        }
    }
}

#[test]
fn endpoint_is_least_squares() {
    for seed in 0..10 {
        let (x, y) = problem(80, 10, 100 + seed);
        let path = lars_path(&x, &y, &LarsOptions::new(10)).unwrap();
        let terminal = path.terminal.expect("full path");
        // least squares with an intercept column via the crate's QR on augmented data
        let mut cols = x.columns().to_vec();
        cols.insert(0, vec![1.0; 80]);
        cols.push(y.iter().map(|v| -v).collect());
        let aug = DataMatrix::from_columns(cols).unwrap();
        let fit = fit_row(&aug, 11, &(0..11).collect::<Vec<_>>()).unwrap();
        for j in 0..10 {
            assert!(
                (terminal[j] - fit.coefficients[j + 1]).abs() < 1e-8,
                "seed {seed} column {j}"
            );
        }
    }
}

#[test]
fn interior_knots_match_coordinate_descent() {
    let (x, y) = problem(80, 10, 7);
    let path = lars_path(&x, &y, &LarsOptions::new(10)).unwrap();
    let (xc, yc) = centered(&x, &y);
    let knots = path.knots();
    assert!(knots.len() >= 6);
    for w in knots.windows(2).take(5) {
        let lambda = 0.5 * (w[0] + w[1]);
        let lars = path.coefficients_at(lambda).unwrap();
        let cd = coordinate_descent(&xc, &yc, lambda);
        for j in 0..10 {
            assert!((lars[j] - cd[j]).abs() < 1e-4, "lambda {lambda} column {j}");
        }
    }
}

#[test]
fn path_stops_at_max_active() {
    let (x, y) = problem(80, 12, 3);
    let path = lars_path(&x, &y, &LarsOptions::new(4)).unwrap();
    assert!(path.active_sets.iter().all(|a| a.len() <= 4));
    assert!(path.terminal.is_none());
    assert_eq!(path.first_entrance().len(), 4);
}

#[test]
fn standardized_path_reaches_the_same_least_squares() {
    let (x, y) = problem(60, 6, 9);
    let plain = lars_path(&x, &y, &LarsOptions::new(6))
        .unwrap()
        .terminal
        .unwrap();
    let opts = LarsOptions {
        max_active: 6,
        standardize: true,
    };
    let scaled = lars_path(&x, &y, &opts).unwrap().terminal.unwrap();
    for (a, b) in plain.iter().zip(&scaled) {
        assert!((a - b).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn active_sets_follow_events(seed in 0u64..10_000, q in 1usize..10, cap in 1usize..10) {
        let (x, y) = problem(40, q, seed);
        let path = lars_path(&x, &y, &LarsOptions::new(cap)).unwrap();
        let mut active = std::collections::BTreeSet::new();
        for (e, set) in path.events.iter().zip(&path.active_sets) {
            match e.action {
                LarsAction::Enter => prop_assert!(active.insert(e.variable)),
                LarsAction::Leave => prop_assert!(active.remove(&e.variable)),
            }
            prop_assert_eq!(&active.iter().copied().collect::<Vec<_>>(), set);
            prop_assert!(set.len() <= cap);
        }
    }

    #[test]
    fn built_collections_are_valid(seed in 0u64..10_000, q in 1usize..9, k in 0usize..6, d in 1usize..6) {
        let (x, y) = problem(40, q, seed);
        let path = lars_path(&x, &y, &LarsOptions::new(d)).unwrap();
        for models in [build_collection_prefix(&path, q, k, d), build_collection_subsets(&path, q, k, d)] {
            prop_assert!(models.contains(&Vec::new()));
            for m in &models {
                prop_assert!(m.len() <= d);
                prop_assert!(m.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(m.iter().all(|&j| j < q));
            }
            let mut dedup = models.clone();
            dedup.dedup();
            prop_assert_eq!(dedup.len(), models.len());
        }
    }
}

#[test]
fn paths_with_drops_keep_stationarity() {
    let mut drops = 0;
    for seed in 0..200 {
        let (x, y) = problem(30, 15, 1000 + seed);
        let path = lars_path(&x, &y, &LarsOptions::new(15)).unwrap();
        if !path.events.iter().any(|e| e.action == LarsAction::Leave) {
            continue;
        }
        drops += 1;
        let (xc, yc) = centered(&x, &y);
        for (e, beta) in path.events.iter().zip(&path.coefficients) {
            let g = gradient(&xc, &yc, beta);
            for j in 0..15 {
                if beta[j] != 0.0 {
                    assert!(
                        (g[j] - e.knot * beta[j].signum()).abs() < 1e-6,
                        "seed {seed}"
                    );
                } else {
                    assert!(g[j].abs() <= e.knot + 1e-6, "seed {seed}");
                }
            }
        }
    }
    assert!(drops > 0, "no path with a leave event");
}
