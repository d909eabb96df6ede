//! Simulated precision matrices and graph recovery metrics.
//!
//! * `Ω₁`: `T[i,j] = 0.5^{i-j}` below the diagonal, `S = 0.01`.
//! * `Ω₂`: row `i` (1-based within its block) has `T[i,j] = 0.5` on its
//!   `k_i ~ U{1, …, ⌈i/2⌉}` nearest predecessors, `S = 0.01`; blocks are
//!   independent.
//! * `Ω₁ᶜ`: edge `j → i` with probability `min(esp/(i-1), 1/2)`,
//!   `T[i,j] ~ U[-1, 1]` on edges and `S[i] ~ U[1, 2]`.
//! * `Ω₂ᶜ`: `Ω₁ᶜ` with ten variables moved to random places in the ordering.

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::ModelGraph;
use crate::linalg::{assemble, decompose, CholeskyPair, DenseMatrix, PrecisionMatrix};
use crate::rng::{generator, substream};
use crate::scalar::Scalar;

/// Number of variables `Ω₂ᶜ` relocates.
pub const RELOCATED: usize = 10;

pub fn gen_omega1<F: Scalar>(p: usize) -> Result<CholeskyPair<F>> {
    check_p(p, 2)?;
    let half = F::of(0.5);
    let t = DenseMatrix::from_fn(p, p, |i, j| match j.cmp(&i) {
        std::cmp::Ordering::Less => half.powi((i - j) as i32),
        std::cmp::Ordering::Equal => F::one(),
        std::cmp::Ordering::Greater => F::zero(),
    });
    CholeskyPair::new(t, vec![F::of(0.01); p])
}

pub fn gen_omega2<F: Scalar>(p: usize, blocks: usize, seed: u64) -> Result<CholeskyPair<F>> {
    check_p(p, 2)?;
    if blocks == 0 || !p.is_multiple_of(blocks) {
        return Err(Error::InvalidInput(format!(
            "{blocks} blocks do not divide p = {p}"
        )));
    }
    let size = p / blocks;
    let mut rng = generator(seed);
    let mut t = DenseMatrix::identity(p);
    for b in 0..blocks {
        let start = b * size;
        for local in 1..size {
            let i = local + 1;
            let k = rng.random_range(1..=i.div_ceil(2)).min(local);
            let row = start + local;
            for j in row - k..row {
                t[(row, j)] = F::of(0.5);
            }
        }
    }
    CholeskyPair::new(t, vec![F::of(0.01); p])
}

pub fn gen_omega1c<F: Scalar>(
    p: usize,
    esp: f64,
    seed: u64,
) -> Result<(CholeskyPair<F>, ModelGraph)> {
    check_p(p, 2)?;
    if !(esp > 0.0) || !esp.is_finite() {
        return Err(Error::InvalidInput(format!(
            "expected parent count must be positive, got {esp}"
        )));
    }
    let mut rng = generator(seed);
    let mut t = DenseMatrix::identity(p);
    let mut s = Vec::with_capacity(p);
    let mut rows = Vec::with_capacity(p);
    for i in 0..p {
        s.push(F::of(rng.random_range(1.0..=2.0)));
        let prob = if i == 0 {
            0.0
        } else {
            (esp / i as f64).min(0.5)
        };
        let mut parents = Vec::new();
        for j in 0..i {
            if rng.random_bool(prob) {
                t[(i, j)] = F::of(rng.random_range(-1.0..=1.0));
                parents.push(j);
            }
        }
        rows.push(parents);
    }
    Ok((CholeskyPair::new(t, s)?, ModelGraph::new(rows)?))
}

#[derive(Clone, Debug)]
pub struct Omega2c<F> {
    /// `P Ω Pᵀ` in the new ordering.
    pub precision: PrecisionMatrix<F>,
    /// `order[k]` is the original index of the variable now at position `k`.
    pub order: Vec<usize>,
    /// Original indices of the relocated variables, in relocation order.
    pub displaced: Vec<usize>,
    /// Cholesky pair and its support in the new ordering.
    pub pair: CholeskyPair<F>,
    pub graph: ModelGraph,
}

pub fn gen_omega2c<F: Scalar>(p: usize, esp: f64, seed: u64) -> Result<Omega2c<F>> {
    if p <= RELOCATED {
        return Err(Error::InvalidInput(format!(
            "relocating {RELOCATED} variables needs p > {RELOCATED}"
        )));
    }
    let (base, _) = gen_omega1c::<F>(p, esp, substream(seed, 0, 0))?;
    let (order, displaced) = relocation_order(p, RELOCATED, substream(seed, 0, 1));
    reorder(&assemble(&base), order, displaced)
}

/// Takes `count` distinct variables in random order; each in turn is
/// removed from the current ordering and reinserted at a uniform position.
pub fn relocation_order(p: usize, count: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = generator(seed);
    let displaced: Vec<usize> = index::sample(&mut rng, p, count.min(p)).into_vec();
    let mut order: Vec<usize> = (0..p).collect();
    for &v in &displaced {
        let at = order
            .iter()
            .position(|&u| u == v)
            .expect("variable present");
        order.remove(at);
        let to = rng.random_range(0..=order.len());
        order.insert(to, v);
    }
    (order, displaced)
}

/// Reorders `omega` and recomputes the Cholesky pair and its support.
pub fn reorder<F: Scalar>(
    omega: &PrecisionMatrix<F>,
    order: Vec<usize>,
    displaced: Vec<usize>,
) -> Result<Omega2c<F>> {
    let precision = omega.permuted(&order);
    let pair = decompose(&precision)?;
    let scale = pair.t().max_abs();
    let graph = ModelGraph::from_support(&pair, F::of(1e-9) * scale);
    Ok(Omega2c {
        precision,
        order,
        displaced,
        pair,
        graph,
    })
}

fn check_p(p: usize, min: usize) -> Result<()> {
    if p < min {
        return Err(Error::InvalidInput(format!(
            "p must be at least {min}, got {p}"
        )));
    }
    Ok(())
}

/// Denominator of the false discovery rate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FdrConvention {
    /// False discoveries over all discoveries.
    #[default]
    FalseOverTotal,
    /// False discoveries over true discoveries (over one when there are none).
    FalseOverTrue,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GraphMetrics {
    pub power: f64,
    pub fdr: f64,
    pub true_discoveries: usize,
    pub false_discoveries: usize,
    pub true_edges: usize,
}

/// Power and false discovery rate of `estimate` over the entries of `T`
/// below the diagonal. Power is one when the truth has no edge, and the rate
/// is zero without discoveries.
pub fn power_fdr(
    truth: &ModelGraph,
    estimate: &ModelGraph,
    convention: FdrConvention,
) -> Result<GraphMetrics> {
    if truth.p() != estimate.p() {
        return Err(Error::SizeMismatch {
            expected: truth.p(),
            found: estimate.p(),
        });
    }
    let true_edges = truth.edge_count();
    let true_discoveries = estimate
        .edges()
        .filter(|&(i, j)| truth.contains_edge(i, j))
        .count();
    let false_discoveries = estimate.edge_count() - true_discoveries;
    let power = if true_edges == 0 {
        1.0
    } else {
        true_discoveries as f64 / true_edges as f64
    };
    let fdr = match convention {
        _ if false_discoveries == 0 => 0.0,
        FdrConvention::FalseOverTotal => {
            false_discoveries as f64 / (true_discoveries + false_discoveries) as f64
        }
        FdrConvention::FalseOverTrue => false_discoveries as f64 / true_discoveries.max(1) as f64,
    };
    Ok(GraphMetrics {
        power,
        fdr,
        true_discoveries,
        false_discoveries,
        true_edges,
    })
}
