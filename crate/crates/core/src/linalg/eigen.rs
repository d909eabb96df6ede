use super::DenseMatrix;
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
/// ascending. Only the lower triangle is read.
pub fn symmetric_eigenvalues<F: Scalar>(a: &DenseMatrix<F>) -> Vec<F> {
    assert!(a.is_square(), "eigenvalues need a square matrix");
    let p = a.nrows();
    let mut m = DenseMatrix::from_fn(p, p, |i, j| if i >= j { a[(i, j)] } else { a[(j, i)] });
    let two = F::of(2.0);

    for _ in 0..MAX_SWEEPS {
        let mut off = F::zero();
        let mut total = F::zero();
        for i in 0..p {
            for j in 0..p {
                let v = m[(i, j)] * m[(i, j)];
                total = total + v;
                if i != j {
                    off = off + v;
                }
            }
        }
        if off <= total * F::epsilon() * F::epsilon() || off == F::zero() {
            break;
        }
        for q in 1..p {
            for r in 0..q {
                let apq = m[(r, q)];
                if apq == F::zero() {
                    continue;
                }
                let app = m[(r, r)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + F::one()).sqrt());
                let c = F::one() / (t * t + F::one()).sqrt();
                let s = t * c;
                for k in 0..p {
                    let mkr = m[(k, r)];
                    let mkq = m[(k, q)];
                    m[(k, r)] = c * mkr - s * mkq;
                    m[(k, q)] = s * mkr + c * mkq;
                }
                for k in 0..p {
                    let mrk = m[(r, k)];
                    let mqk = m[(q, k)];
                    m[(r, k)] = c * mrk - s * mqk;
                    m[(q, k)] = s * mrk + c * mqk;
                }
            }
        }
    }
    let mut eig = m.diagonal();
    eig.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    eig
}
