//! Candidate collections read off a Lasso path.
//!
//! Both builders return models sorted by size and then lexicographically,
//! always including the empty model. Variables are the predictor columns,
//! which for row `i` are the predecessors `0..i`.

use std::collections::BTreeSet;

use super::lars::LarsPath;
use crate::selection::combinations;

/// Prefix sets of the first-entrance order, one per length `1..=D`.
fn regularization_prefixes(order: &[usize], max_active: usize, out: &mut BTreeSet<Vec<usize>>) {
    for len in 1..=order.len().min(max_active) {
        let mut m = order[..len].to_vec();
        m.sort_unstable();
        out.insert(m);
    }
}

fn power_set(vars: &[usize], max_size: usize, out: &mut BTreeSet<Vec<usize>>) {
    let mut sorted = vars.to_vec();
    sorted.sort_unstable();
    let mut idx = Vec::new();
    for size in 0..=sorted.len().min(max_size) {
        idx.clear();
        combinations(sorted.len(), size, &mut idx);
        for c in &idx {
            out.insert(c.iter().map(|&k| sorted[k]).collect());
        }
    }
}

fn finish(set: BTreeSet<Vec<usize>>) -> Vec<Vec<usize>> {
    let mut models: Vec<Vec<usize>> = set.into_iter().collect();
    models.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    models
}

/// Every subset of the first `k ∧ i ∧ D` variables to enter the path, with
/// the prefix sets of the entrance order up to `D` variables. `row` is the
/// number of candidate predecessors.
pub fn build_collection_prefix(
    path: &LarsPath,
    row: usize,
    k: usize,
    max_active: usize,
) -> Vec<Vec<usize>> {
    let order: Vec<usize> = path
        .first_entrance()
        .into_iter()
        .filter(|&j| j < row)
        .collect();
    let mut out = BTreeSet::new();
    out.insert(Vec::new());
    let width = k.min(row).min(max_active).min(order.len());
    power_set(&order[..width], usize::MAX, &mut out);
    regularization_prefixes(&order, max_active, &mut out);
    finish(out)
}

/// Every subset of each active set of at most `k` variables met along the
/// path, with the prefix sets of the entrance order up to `D` variables. No
/// subset has more than `D` elements.
pub fn build_collection_subsets(
    path: &LarsPath,
    row: usize,
    k: usize,
    max_active: usize,
) -> Vec<Vec<usize>> {
    let order: Vec<usize> = path
        .first_entrance()
        .into_iter()
        .filter(|&j| j < row)
        .collect();
    let mut out = BTreeSet::new();
    out.insert(Vec::new());
    let mut seen: BTreeSet<&[usize]> = BTreeSet::new();
    for active in &path.active_sets {
        if active.len() <= k && active.iter().all(|&j| j < row) && seen.insert(active.as_slice()) {
            power_set(active, max_active, &mut out);
        }
    }
    regularization_prefixes(&order, max_active, &mut out);
    finish(out)
}
