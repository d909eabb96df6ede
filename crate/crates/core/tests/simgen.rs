use choselect::linalg::symmetric_eigenvalues;
use choselect::simgen::{
    gen_omega1, gen_omega1c, gen_omega2, gen_omega2c, power_fdr, reorder, FdrConvention, RELOCATED,
};
use choselect::{assemble, ModelGraph};
use proptest::prelude::*;

#[test]
fn omega1_is_positive_definite() {
    let omega = assemble(&gen_omega1::<f64>(5).unwrap());
    assert!(symmetric_eigenvalues(omega.matrix())
        .iter()
        .all(|&v| v > 0.0));
}

#[test]
fn omega2_rows_are_contiguous_runs() {
    for seed in 0..20 {
        let pair = gen_omega2::<f64>(40, 4, seed).unwrap();
        for block in 0..4 {
            for local in 1..10 {
                let row = block * 10 + local;
                let support: Vec<usize> = (0..row).filter(|&j| pair.t()[(row, j)] != 0.0).collect();
                let len = support.len();
                assert!(len >= 1 && len <= (local + 1).div_ceil(2));
                assert_eq!(support, (row - len..row).collect::<Vec<_>>());
                assert!(support.iter().all(|&j| pair.t()[(row, j)] == 0.5));
            }
        }
    }
    let degenerate = gen_omega2::<f64>(6, 6, 1).unwrap();
    assert_eq!(ModelGraph::from_support(&degenerate, 0.0).edge_count(), 0);
}

#[test]
fn omega1c_small_esp_is_empty() {
    let (pair, graph) = gen_omega1c::<f64>(30, 1e-12, 5).unwrap();
    assert_eq!(graph.edge_count(), 0);
    assert!(pair.s().iter().all(|&s| (1.0..=2.0).contains(&s)));
}

#[test]
fn omega1c_parent_counts() {
    let counts: Vec<f64> = (0..200)
        .map(|seed| {
            let (_, graph) = gen_omega1c::<f64>(100, 3.0, seed).unwrap();
            let rows = &graph.rows()[7..];
            rows.iter().map(Vec::len).sum::<usize>() as f64 / rows.len() as f64
        })
        .collect();
    let mean = counts.iter().sum::<f64>() / 200.0;
    let sd = (counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / 199.0).sqrt();
    assert!(
        (mean - 3.0).abs() <= 3.0 * sd / 200f64.sqrt(),
        "mean {mean}"
    );
}

#[test]
fn omega2c_relocates_ten_variables() {
    let g = gen_omega2c::<f64>(30, 2.0, 3).unwrap();
    let mut displaced = g.displaced.clone();
    displaced.sort_unstable();
    displaced.dedup();
    assert_eq!(displaced.len(), RELOCATED);
    let mut order = g.order.clone();
    order.sort_unstable();
    assert_eq!(order, (0..30).collect::<Vec<_>>());
}

#[test]
fn identity_order_keeps_the_matrix() {
    let (pair, _) = gen_omega1c::<f64>(15, 2.0, 6).unwrap();
    let omega = assemble(&pair);
    let kept = reorder(&omega, (0..15).collect(), Vec::new()).unwrap();
    assert_eq!(kept.precision, omega);
}

#[test]
fn graph_metric_examples() {
    let truth = ModelGraph::new(vec![vec![], vec![0], vec![]]).unwrap();
    let same = power_fdr(&truth, &truth, FdrConvention::FalseOverTotal).unwrap();
    assert_eq!((same.power, same.fdr), (1.0, 0.0));
    let empty = power_fdr(&truth, &ModelGraph::empty(3), FdrConvention::FalseOverTotal).unwrap();
    assert_eq!((empty.power, empty.fdr), (0.0, 0.0));
    let extra = ModelGraph::new(vec![vec![], vec![0], vec![1]]).unwrap();
    let m = power_fdr(&truth, &extra, FdrConvention::FalseOverTotal).unwrap();
    assert_eq!((m.power, m.fdr), (1.0, 0.5));
    assert!(power_fdr(&truth, &ModelGraph::empty(4), FdrConvention::FalseOverTotal).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn omega2c_keeps_the_spectrum(seed in any::<u64>(), p in 11usize..40) {
        let g = gen_omega2c::<f64>(p, 2.0, seed).unwrap();
        let original = g.precision.permuted(&inverse(&g.order));
        let a = symmetric_eigenvalues(g.precision.matrix());
        let b = symmetric_eigenvalues(original.matrix());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10 * y.abs().max(1.0));
        }
    }

    #[test]
    fn generators_are_deterministic(seed in any::<u64>()) {
        prop_assert_eq!(gen_omega2::<f64>(20, 2, seed).unwrap(), gen_omega2::<f64>(20, 2, seed).unwrap());
        prop_assert_eq!(gen_omega1c::<f64>(20, 2.0, seed).unwrap(), gen_omega1c::<f64>(20, 2.0, seed).unwrap());
        let (a, b) = (gen_omega2c::<f64>(20, 2.0, seed).unwrap(), gen_omega2c::<f64>(20, 2.0, seed).unwrap());
        prop_assert_eq!(a.precision, b.precision);
        prop_assert_eq!(a.displaced, b.displaced);
    }

    #[test]
    fn generated_matrices_are_positive_definite(seed in any::<u64>(), p in 2usize..30) {
        let (pair, _) = gen_omega1c::<f64>(p, 1.5, seed).unwrap();
        prop_assert!(symmetric_eigenvalues(assemble(&pair).matrix()).iter().all(|&v| v > 0.0));
        let pair = gen_omega2::<f64>(p, 1, seed).unwrap();
        prop_assert!(symmetric_eigenvalues(assemble(&pair).matrix()).iter().all(|&v| v > 0.0));
    }
}

fn inverse(order: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; order.len()];
    for (k, &v) in order.iter().enumerate() {
        inv[v] = k;
    }
    inv
}
