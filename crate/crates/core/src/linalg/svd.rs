//! Singular value decomposition by one-sided Jacobi.
//!
//! The working copy holds the columns of `A` as contiguous rows (i.e. `A^T`)
//! and Givens rotations orthogonalize row pairs until all mutual dots are
//! negligible; row norms are then the singular values and the accumulated
//! rotations give `V^T`. Jacobi is slower than bidiagonalization methods but
//! simple, deterministic, and accurate down to tiny singular values, which
//! is what the decomposition and its tests need.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

const MAX_SWEEPS: usize = 100;
const PAIR_TOL: f64 = 1e-13;

/// Result of `svd`: `a = u * diag(s) * vt` with `s` non-increasing.
#[derive(Clone, Debug)]
pub struct SvdResult {
    /// Left singular vectors, orthonormal columns (n x r, r = min shape).
    pub u: DenseMatrix,
    /// Singular values, non-increasing, all >= 0.
    pub s: Vec<f64>,
    /// Right singular vectors, orthonormal rows (r x m).
    pub vt: DenseMatrix,
}

impl SvdResult {
    /// `u[:, ..k] * diag(s[..k]) * vt[..k, :]`.
    pub fn truncated_product(&self, k: usize) -> DenseMatrix {
        let (n, m) = (self.u.rows(), self.vt.cols());
        let mut out = DenseMatrix::zeros(n, m);
        for i in 0..n {
            let row = out.row_mut(i);
            for (l, &sv) in self.s.iter().enumerate().take(k) {
                let c = self.u.get(i, l) * sv;
                if c == 0.0 {
                    continue;
                }
                for (o, &v) in row.iter_mut().zip(self.vt.row(l)) {
                    *o += c * v;
                }
            }
        }
        out
    }
}

/// Full SVD of a dense matrix. Deterministic for a given input.
pub fn svd(a: &DenseMatrix) -> Result<SvdResult> {
    if a.cols() <= a.rows() {
        svd_tall(a)
    } else {
        // svd(A^T) = U1 S V1^T  =>  A = V1 S U1^T
        let r = svd_tall(&a.transpose())?;
        Ok(SvdResult { u: r.vt.transpose(), s: r.s, vt: r.u.transpose() })
    }
}

fn svd_tall(a: &DenseMatrix) -> Result<SvdResult> {
    let (n, m) = a.shape();
    debug_assert!(m <= n);
    // rows of b are the columns of a
    let mut b = a.transpose();
    let mut rot = DenseMatrix::identity(m);

    // cached squared row norms, refreshed each sweep
    let mut norms: Vec<f64> = (0..m)
        .map(|i| b.row(i).iter().map(|x| x * x).sum())
        .collect();
    // rows this far below the matrix scale are numerically zero; pairing
    // them only chases rounding noise and stalls convergence
    let total2: f64 = norms.iter().sum();
    let dead = total2 * 1e-28;

    let mut converged = m < 2;
    let mut worst_ratio = 0.0f64;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        worst_ratio = 0.0;
        for i in 0..m {
            for j in (i + 1)..m {
                let (ni, nj) = (norms[i], norms[j]);
                if ni <= dead || nj <= dead {
                    continue;
                }
                let dot = crate::matrix::dot(b.row(i), b.row(j));
                let bound = PAIR_TOL * (ni * nj).sqrt();
                if dot.abs() <= bound {
                    continue;
                }
                worst_ratio = worst_ratio.max(dot.abs() / (ni * nj).sqrt());
                rotated = true;
                let tau = (nj - ni) / (2.0 * dot);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_rows(&mut b, i, j, c, s);
                rotate_rows(&mut rot, i, j, c, s);
                norms[i] = (c * c * ni - 2.0 * c * s * dot + s * s * nj).max(0.0);
                norms[j] = (s * s * ni + 2.0 * c * s * dot + c * c * nj).max(0.0);
            }
        }
        if !rotated {
            converged = true;
        } else {
            for (i, norm) in norms.iter_mut().enumerate() {
                *norm = b.row(i).iter().map(|x| x * x).sum();
            }
        }
    }
    if !converged {
        return Err(Error::ConvergenceFailure { what: "jacobi svd", residual: worst_ratio });
    }

    let mut sigma: Vec<f64> = (0..m)
        .map(|i| b.row(i).iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap());
    sigma = order.iter().map(|&i| sigma[i]).collect();

    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    let tiny = sigma_max * 1e-13;

    let mut u = DenseMatrix::zeros(n, m);
    let mut vt = DenseMatrix::zeros(m, m);
    let mut needs_fill = Vec::new();
    for (col, &src) in order.iter().enumerate() {
        vt.row_mut(col).copy_from_slice(rot.row(src));
        if sigma[col] > tiny && sigma[col] > 0.0 {
            let inv = 1.0 / sigma[col];
            for r in 0..n {
                u.set(r, col, b.get(src, r) * inv);
            }
        } else {
            needs_fill.push(col);
        }
    }
    if !needs_fill.is_empty() {
        complete_orthonormal(&mut u, &needs_fill);
    }

    Ok(SvdResult { u, s: sigma, vt })
}

#[inline]
fn rotate_rows(m: &mut DenseMatrix, i: usize, j: usize, c: f64, s: f64) {
    let cols = m.cols();
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    let (head, tail) = m.as_mut_slice().split_at_mut(hi * cols);
    let row_lo = &mut head[lo * cols..(lo + 1) * cols];
    let row_hi = &mut tail[..cols];
    if lo == i {
        for (x, y) in row_lo.iter_mut().zip(row_hi.iter_mut()) {
            let (xi, xj) = (*x, *y);
            *x = c * xi - s * xj;
            *y = s * xi + c * xj;
        }
    } else {
        for (y, x) in row_lo.iter_mut().zip(row_hi.iter_mut()) {
            let (xi, xj) = (*x, *y);
            *x = c * xi - s * xj;
            *y = s * xi + c * xj;
        }
    }
}

/// Replace the listed columns of `u` by vectors orthonormal to all other
/// columns: one pass over standard basis candidates, each Gram-Schmidt
/// projected (twice) against the kept and already-filled columns. Every
/// candidate is visited at most once, so completion stays O(n m f).
fn complete_orthonormal(u: &mut DenseMatrix, fill: &[usize]) {
    let (n, m) = u.shape();
    let mut is_pending = vec![false; m];
    for &c in fill {
        is_pending[c] = true;
    }
    let mut slots = fill.iter().copied();
    let mut current = slots.next();
    for candidate in 0..n {
        let Some(col) = current else { break };
        let mut v = vec![0.0; n];
        v[candidate] = 1.0;
        for _pass in 0..2 {
            for c in 0..m {
                if is_pending[c] {
                    continue;
                }
                let mut dot = 0.0;
                for (r, item) in v.iter().enumerate() {
                    dot += u.get(r, c) * item;
                }
                if dot != 0.0 {
                    for (r, item) in v.iter_mut().enumerate() {
                        *item -= dot * u.get(r, c);
                    }
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        // rank-nullity: enough basis vectors survive projection
        if norm > 0.1 {
            for (r, item) in v.iter().enumerate() {
                u.set(r, col, item / norm);
            }
            is_pending[col] = false;
            current = slots.next();
        }
    }
    assert!(current.is_none(), "orthonormal completion ran out of candidates");
}

/// Condition number sigma_max / sigma_min; `f64::INFINITY` when the smallest
/// singular value is below 1e-300 (or the matrix is zero).
pub fn condition_number(d: &DenseMatrix) -> f64 {
    assert!(d.is_square(), "condition_number: matrix must be square");
    // cyclic Jacobi converges for every finite matrix; the sweep cap is unreachable
    let r = svd(d).expect("jacobi svd convergence");
    let smax = r.s[0];
    let smin = r.s[r.s.len() - 1];
    if smin <= 1e-300 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// Moore-Penrose pseudoinverse; singular values below `rcond * sigma_max`
/// are treated as zero.
pub fn pseudo_inverse(a: &DenseMatrix, rcond: f64) -> DenseMatrix {
    assert!(rcond > 0.0 && rcond < 1.0, "pseudo_inverse: rcond must be in (0, 1)");
    let r = svd(a).expect("jacobi svd convergence");
    let smax = r.s[0];
    let cut = rcond * smax;
    // A+ = V diag(1/s) U^T, computed as (V scaled) * U^T
    let mut v_scaled = r.vt.transpose(); // m x r
    let (m, rr) = v_scaled.shape();
    for col in 0..rr {
        let s = r.s[col];
        let f = if smax == 0.0 || s <= cut { 0.0 } else { 1.0 / s };
        for row in 0..m {
            v_scaled.set(row, col, v_scaled.get(row, col) * f);
        }
    }
    v_scaled.mul_tr(&r.u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    fn reconstruct(r: &SvdResult) -> DenseMatrix {
        r.truncated_product(r.s.len())
    }

    #[test]
    fn diagonal_singular_values_sorted() {
        let a = DenseMatrix::from_diag(&[2.0, 3.0, 5.0]);
        let r = svd(&a).unwrap();
        assert!((r.s[0] - 5.0).abs() < 1e-12);
        assert!((r.s[1] - 3.0).abs() < 1e-12);
        assert!((r.s[2] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_rank_two_example() {
        // U Sigma U^T with U = [e1|e2; e1|e2] pattern, Sigma = diag(3, 1)
        let u = DenseMatrix::from_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 0.0], &[0.0, 1.0]])
            .unwrap();
        let a = u.mul(&DenseMatrix::from_diag(&[3.0, 1.0])).mul_tr(&u);
        let r = svd(&a).unwrap();
        assert!((r.s[0] - 6.0).abs() < 1e-10); // columns of u have norm sqrt(2)
        assert!((r.s[1] - 2.0).abs() < 1e-10);
        assert!(r.s[2] <= 1e-10);
        assert!(r.s[3] <= 1e-10);
        let orth = r.u.tr_mul(&r.u).sub(&DenseMatrix::identity(4)).frobenius_norm();
        assert!(orth < 1e-10 * 4.0, "U orthonormality {orth}");
    }

    #[test]
    fn random_rectangular_reconstruction() {
        let mut rng = Stream::new(17, "svd_rect");
        for &(n, m) in &[(6usize, 4usize), (4, 6), (7, 7), (9, 2)] {
            let a = rng.gaussian_matrix(n, m);
            let r = svd(&a).unwrap();
            let rel = reconstruct(&r).frobenius_distance(&a) / a.frobenius_norm();
            assert!(rel < 1e-12, "({n},{m}) reconstruction {rel}");
            let k = n.min(m);
            let orth_u = r.u.tr_mul(&r.u).sub(&DenseMatrix::identity(k)).frobenius_norm();
            let orth_v = r.vt.mul_tr(&r.vt).sub(&DenseMatrix::identity(k)).frobenius_norm();
            assert!(orth_u <= 1e-10 * k as f64);
            assert!(orth_v <= 1e-10 * k as f64);
            for w in r.s.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn zero_matrix_has_orthonormal_basis() {
        let a = DenseMatrix::zeros(5, 3);
        let r = svd(&a).unwrap();
        assert!(r.s.iter().all(|&s| s == 0.0));
        let orth = r.u.tr_mul(&r.u).sub(&DenseMatrix::identity(3)).frobenius_norm();
        assert!(orth < 1e-12);
    }

    #[test]
    fn condition_number_cases() {
        assert_eq!(condition_number(&DenseMatrix::identity(4)), 1.0);
        let d = DenseMatrix::from_diag(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!((condition_number(&d) - 5.0).abs() < 1e-12);
        assert_eq!(condition_number(&DenseMatrix::zeros(3, 3)), f64::INFINITY);
        // scale invariance
        let c = DenseMatrix::identity(6).scale(-3.5e-7);
        assert!((condition_number(&c) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn geometric_spectrum_condition_number() {
        // sigma_i = 10^(-6(i-1)/49), i = 1..50: kappa = 1e6
        let s: Vec<f64> = (0..50).map(|i| 10f64.powf(-6.0 * i as f64 / 49.0)).collect();
        let d = DenseMatrix::from_diag(&s);
        let kappa = condition_number(&d);
        assert!((kappa - 1e6).abs() / 1e6 < 1e-6, "kappa {kappa}");
    }

    #[test]
    fn pseudo_inverse_cases() {
        // invertible 2x2
        let a = DenseMatrix::from_rows(&[&[4.0, 7.0], &[2.0, 6.0]]).unwrap();
        let inv = DenseMatrix::from_rows(&[&[0.6, -0.7], &[-0.2, 0.4]]).unwrap();
        let p = pseudo_inverse(&a, 1e-12);
        assert!(p.frobenius_distance(&inv) < 1e-10);

        // rank-1 u v^T has pseudoinverse v u^T / (|u|^2 |v|^2)
        let u = [1.0, 2.0, -1.0];
        let v = [3.0, 0.5];
        let a = DenseMatrix::from_fn(3, 2, |i, j| u[i] * v[j]);
        let nu: f64 = u.iter().map(|x| x * x).sum();
        let nv: f64 = v.iter().map(|x| x * x).sum();
        let expect = DenseMatrix::from_fn(2, 3, |i, j| v[i] * u[j] / (nu * nv));
        let p = pseudo_inverse(&a, 1e-12);
        assert!(p.frobenius_distance(&expect) < 1e-12);

        // zero matrix maps to zero matrix
        let z = DenseMatrix::zeros(3, 4);
        let p = pseudo_inverse(&z, 1e-12);
        assert_eq!(p.shape(), (4, 3));
        assert_eq!(p.frobenius_norm(), 0.0);
    }
}
