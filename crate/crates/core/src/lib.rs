//! Gaussian precision matrix estimation by penalized model selection on the
//! rows of the modified Cholesky factor `Ω = Tᵀ diag(S)⁻¹ T`.
//!
//! Each row `i` of `T` is the regression of variable `i` on its predecessors
//! in a fixed ordering. [`choselect`] picks, row by row, the predecessor set
//! minimizing a penalized log residual variance; [`choselect_fast`] first
//! narrows the candidates with a Lasso path.

// `!(x > 0.0)` is how NaN fails the positivity checks.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod baselines;
pub mod error;
pub mod graph;
pub mod lasso;
pub mod linalg;
pub mod losses;
pub mod rng;
pub mod scalar;
pub mod selection;
pub mod simgen;
pub mod two_stage;

pub use error::{Error, Result};
pub use graph::ModelGraph;
pub use linalg::{
    assemble, decompose, empirical_covariance, fit_row, sample, CholeskyPair, DataMatrix,
    DenseMatrix, PrecisionMatrix, RowFit,
};
pub use losses::{conditional_kullback, contrast, kullback, loss_report, risk_term, LossReport};
pub use scalar::Scalar;
pub use selection::{
    choselect, criterion, enumerate_complete, enumerate_ordered, select_row, ChoSelectFit,
    CollectionSpec, PenaltyKind, PenaltySpec, PriorWeights, RowSelection,
};
pub use two_stage::{choselect_fast, Builder, FastFit, TwoStageConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Double precision aliases.
pub type Matrix = DenseMatrix<f64>;
pub type Data = DataMatrix<f64>;
pub type Pair = CholeskyPair<f64>;
pub type Precision = PrecisionMatrix<f64>;
