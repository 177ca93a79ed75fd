use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a symmetric matrix by cyclic two-sided Jacobi.
///
/// Returns eigenvalues in non-increasing order and the matching
/// eigenvectors as columns, so `a = V diag(vals) V^T`.
pub fn sym_eigen(a: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    assert!(a.is_square(), "sym_eigen: matrix must be square");
    let n = a.rows();
    let mut m = a.symmetrized();
    let mut v = DenseMatrix::identity(n);

    let scale = m.max_abs();
    if scale == 0.0 {
        return Ok((vec![0.0; n], v));
    }
    let tol = 1e-14 * scale;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq.abs() <= tol {
                    continue;
                }
                rotated = true;
                let theta = (m.get(q, q) - m.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                let app = m.get(p, p);
                let aqq = m.get(q, q);
                m.set(p, p, app - t * apq);
                m.set(q, q, aqq + t * apq);
                m.set(p, q, 0.0);
                m.set(q, p, 0.0);
                for i in 0..n {
                    if i != p && i != q {
                        let aip = m.get(i, p);
                        let aiq = m.get(i, q);
                        m.set(i, p, c * aip - s * aiq);
                        m.set(p, i, c * aip - s * aiq);
                        m.set(i, q, s * aip + c * aiq);
                        m.set(q, i, s * aip + c * aiq);
                    }
                }
                for i in 0..n {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, c * vip - s * viq);
                    v.set(i, q, s * vip + c * viq);
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(m.get(p, q).abs());
            }
        }
        return Err(Error::ConvergenceFailure { what: "jacobi eigendecomposition", residual: off });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(j, j).partial_cmp(&m.get(i, i)).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| m.get(i, i)).collect();
    let mut vecs = DenseMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for i in 0..n {
            vecs.set(i, new_col, v.get(i, old_col));
        }
    }
    Ok((vals, vecs))
}
