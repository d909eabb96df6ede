//! Dense linear algebra: matrices, the modified Cholesky decomposition, the
//! per-row least-squares fits and Gaussian sampling.

mod cholesky;
mod eigen;
mod matrix;
mod qr;
mod types;

pub use cholesky::{spd_inverse, Cholesky};
pub use eigen::symmetric_eigenvalues;
pub use matrix::DenseMatrix;
pub(crate) use qr::validate_model;
pub use qr::{fit_row, NestedFits, RowFit, RANK_TOLERANCE};
pub use types::{
    assemble, decompose, empirical_covariance, sample, CholeskyPair, DataMatrix, PrecisionMatrix,
};
