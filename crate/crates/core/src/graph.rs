//! Per-row parent sets, equivalently a DAG compatible with the variable
//! ordering. Indices are 0-based throughout the library.

use crate::error::{Error, Result};
use crate::linalg::{validate_model, CholeskyPair};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModelGraph {
    rows: Vec<Vec<usize>>,
}

impl ModelGraph {
    /// Each `rows[i]` must be strictly increasing with entries below `i`.
    pub fn new(rows: Vec<Vec<usize>>) -> Result<Self> {
        for (i, r) in rows.iter().enumerate() {
            validate_model(i, r)?;
        }
        Ok(Self { rows })
    }

    pub fn empty(p: usize) -> Self {
        Self {
            rows: vec![Vec::new(); p],
        }
    }

    pub fn complete(p: usize) -> Self {
        Self {
            rows: (0..p).map(|i| (0..i).collect()).collect(),
        }
    }

    /// Nonzero pattern of `T` below the diagonal, entries with `|T[i,j]| > tol`.
    pub fn from_support<F: Scalar>(pair: &CholeskyPair<F>, tol: F) -> Self {
        let rows = (0..pair.p())
            .map(|i| {
                pair.row_coefficients(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| v.abs() > tol)
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        Self { rows }
    }

    pub fn p(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Edges `(child, parent)` with `parent < child`, row by row.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&j| (i, j)))
    }

    pub fn contains_edge(&self, child: usize, parent: usize) -> bool {
        self.rows
            .get(child)
            .is_some_and(|r| r.binary_search(&parent).is_ok())
    }

    /// Builds a graph from `(child, parent)` pairs.
    pub fn from_edges(p: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut rows = vec![Vec::new(); p];
        for (i, j) in edges {
            if i >= p || j >= i {
                return Err(Error::InvalidInput(format!(
                    "edge ({i}, {j}) is not below the diagonal"
                )));
            }
            rows[i].push(j);
        }
        for r in &mut rows {
            r.sort_unstable();
            r.dedup();
        }
        Ok(Self { rows })
    }
}
