use crate::error::{Error, Result};

use super::penalty::log_binomial;

/// Which predecessors the nested (banding) models take first.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Orientation {
    /// `{i-1}, {i-1, i-2}, …`: the entries closest to the diagonal.
    #[default]
    NearestFirst,
    /// `{0}, {0, 1}, …`: the first variables of the ordering.
    FirstFirst,
}

/// Default budget on the size of a single row's complete collection.
pub const DEFAULT_COMPLETE_BUDGET: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub enum CollectionSpec {
    /// Nested models of at most `max_dim` predecessors.
    Ordered {
        max_dim: usize,
        orientation: Orientation,
    },
    /// Every subset of at most `max_dim` predecessors; a row whose collection
    /// holds more than `budget` models fails with `BudgetExceeded`.
    Complete { max_dim: usize, budget: u128 },
    /// User supplied models, `rows[i]` listing the candidates of row `i`.
    Explicit(Vec<Vec<Vec<usize>>>),
}

impl CollectionSpec {
    pub fn ordered(max_dim: usize) -> Self {
        Self::Ordered {
            max_dim,
            orientation: Orientation::NearestFirst,
        }
    }

    pub fn complete(max_dim: usize) -> Self {
        Self::Complete {
            max_dim,
            budget: DEFAULT_COMPLETE_BUDGET,
        }
    }

    /// Number of models of each size in row `row`'s collection.
    pub(crate) fn size_counts(&self, row: usize) -> Vec<f64> {
        match self {
            Self::Ordered { max_dim, .. } => vec![1.0; (*max_dim).min(row) + 1],
            Self::Complete { max_dim, .. } => (0..=(*max_dim).min(row))
                .map(|d| log_binomial(row, d).exp())
                .collect(),
            Self::Explicit(rows) => {
                let models = rows.get(row).map(Vec::as_slice).unwrap_or(&[]);
                let largest = models.iter().map(Vec::len).max().unwrap_or(0);
                let mut counts = vec![0.0; largest + 1];
                for m in models {
                    counts[m.len()] += 1.0;
                }
                counts
            }
        }
    }
}

/// The nested models of row `row`: the empty set, then prefixes of
/// `min(max_dim, row)` predecessors. Each model is sorted ascending.
pub fn enumerate_ordered(row: usize, max_dim: usize, orientation: Orientation) -> Vec<Vec<usize>> {
    let order = ordered_predecessors(row, max_dim, orientation);
    (0..=order.len())
        .map(|len| {
            let mut m = order[..len].to_vec();
            m.sort_unstable();
            m
        })
        .collect()
}

/// Predecessors of `row` in the order the nested models add them.
pub fn ordered_predecessors(row: usize, max_dim: usize, orientation: Orientation) -> Vec<usize> {
    let len = max_dim.min(row);
    match orientation {
        Orientation::NearestFirst => (0..len).map(|k| row - 1 - k).collect(),
        Orientation::FirstFirst => (0..len).collect(),
    }
}

/// `Σ_{j ≤ min(d, q)} C(q, j)`, saturating.
pub fn complete_collection_size(predecessors: usize, max_dim: usize) -> u128 {
    let mut total: u128 = 0;
    let mut term: u128 = 1;
    for j in 0..=max_dim.min(predecessors) {
        if j > 0 {
            term = term.saturating_mul((predecessors - j + 1) as u128) / j as u128;
        }
        total = total.saturating_add(term);
    }
    total
}

/// All subsets of the predecessors of `row` with at most `max_dim` elements,
/// by size and then lexicographically.
pub fn enumerate_complete(row: usize, max_dim: usize, budget: u128) -> Result<Vec<Vec<usize>>> {
    let count = complete_collection_size(row, max_dim);
    if count > budget {
        return Err(Error::BudgetExceeded { count, budget });
    }
    let mut out = Vec::with_capacity(count as usize);
    for size in 0..=max_dim.min(row) {
        combinations(row, size, &mut out);
    }
    Ok(out)
}

/// Appends every `size`-subset of `0..q` in lexicographic order.
pub(crate) fn combinations(q: usize, size: usize, out: &mut Vec<Vec<usize>>) {
    if size > q {
        return;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        out.push(idx.clone());
        let mut k = size;
        while k > 0 && idx[k - 1] == q - size + k - 1 {
            k -= 1;
        }
        if k == 0 {
            return;
        }
        idx[k - 1] += 1;
        for j in k..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
