//! The quantitative measures reported by the experiment suite.

use crate::ddecomp::FactorTriple;
use crate::error::{Error, Result};
use crate::linalg::{condition_number, svd};
use crate::matrix::DenseMatrix;

/// `||a - approx||_F / ||a||_F`.
pub fn relative_frobenius_error(a: &DenseMatrix, approx: &DenseMatrix) -> Result<f64> {
    if a.shape() != approx.shape() {
        return Err(Error::ShapeMismatch {
            op: "relative_frobenius_error",
            expected: format!("{:?}", a.shape()),
            found: format!("{:?}", approx.shape()),
        });
    }
    let norm = a.frobenius_norm();
    if norm == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    Ok(a.frobenius_distance(approx) / norm)
}

/// Root mean squared difference over the entries selected by `mask`.
pub fn rmse_masked(a: &DenseMatrix, approx: &DenseMatrix, mask: &[bool]) -> Result<f64> {
    if a.shape() != approx.shape() || mask.len() != a.rows() * a.cols() {
        return Err(Error::ShapeMismatch {
            op: "rmse_masked",
            expected: format!("{:?} and mask of {}", a.shape(), a.rows() * a.cols()),
            found: format!("{:?} and mask of {}", approx.shape(), mask.len()),
        });
    }
    let mut count = 0usize;
    let mut acc = 0.0;
    for ((&x, &y), &m) in a.as_slice().iter().zip(approx.as_slice()).zip(mask) {
        if m {
            let d = x - y;
            acc += d * d;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptyMask);
    }
    Ok((acc / count as f64).sqrt())
}

/// Per-component spectral weights of `P` against the top-k eigenvectors of
/// a symmetric PSD matrix, and their normalized sum.
#[derive(Clone, Debug)]
pub struct AlignmentReport {
    /// `eta_i = ||u_i^T P||_2^2` for the top-k eigenvectors `u_i`.
    pub eta: Vec<f64>,
    /// `sum(eta) / ||P||_F^2`, in [0, 1] up to rounding.
    pub alignment_ratio: f64,
    pub k: usize,
}

/// Fraction of P's Frobenius mass lying in the span of the top-k
/// eigenvectors of `a`. `a` is symmetrized before eigendecomposition;
/// asymmetry beyond 1e-8 relative is rejected.
pub fn energy_alignment(a: &DenseMatrix, p: &DenseMatrix) -> Result<AlignmentReport> {
    if !a.is_square() || a.rows() != p.rows() {
        return Err(Error::ShapeMismatch {
            op: "energy_alignment",
            expected: "square a with matching p rows".into(),
            found: format!("a {:?}, p {:?}", a.shape(), p.shape()),
        });
    }
    let dev = a.symmetry_deviation();
    if dev > 1e-8 {
        return Err(Error::NotSymmetric { deviation: dev });
    }
    let pnorm = p.frobenius_norm();
    if pnorm == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let k = p.cols();
    // PSD input: singular vectors coincide with eigenvectors
    let r = svd(&a.symmetrized())?;
    let mut eta = Vec::with_capacity(k);
    for i in 0..k {
        let mut norm2 = 0.0;
        for col in 0..p.cols() {
            let mut dot = 0.0;
            for row in 0..p.rows() {
                dot += r.u.get(row, i) * p.get(row, col);
            }
            norm2 += dot * dot;
        }
        eta.push(norm2);
    }
    let alignment_ratio = eta.iter().sum::<f64>() / (pnorm * pnorm);
    Ok(AlignmentReport { eta, alignment_ratio, k })
}

/// Condition number of the core factor.
pub fn kappa_of_core(triple: &FactorTriple) -> f64 {
    condition_number(&triple.d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::orthonormal_columns;
    use crate::rng::Stream;

    #[test]
    fn relative_error_cases() {
        let a = DenseMatrix::from_diag(&[3.0, 1.0]);
        assert_eq!(relative_frobenius_error(&a, &a).unwrap(), 0.0);
        let zero = DenseMatrix::zeros(2, 2);
        assert_eq!(relative_frobenius_error(&a, &zero).unwrap(), 1.0);
        let b = DenseMatrix::from_diag(&[3.0, 0.0]);
        let err = relative_frobenius_error(&a, &b).unwrap();
        assert!((err - 1.0 / 10f64.sqrt()).abs() < 1e-15);
        assert!(matches!(relative_frobenius_error(&zero, &a), Err(Error::ZeroMatrix)));
    }

    #[test]
    fn rmse_cases() {
        let a = DenseMatrix::from_diag(&[1.0, 2.0]);
        let full = vec![true; 4];
        assert_eq!(rmse_masked(&a, &a, &full).unwrap(), 0.0);

        let mut b = a.clone();
        b.set(0, 1, 2.0);
        let mut single = vec![false; 4];
        single[1] = true;
        assert_eq!(rmse_masked(&a, &b, &single).unwrap(), 2.0);

        assert!(matches!(rmse_masked(&a, &a, &[false; 4]), Err(Error::EmptyMask)));
    }

    #[test]
    fn rmse_matches_direct_loop_oracle() {
        let mut rng = Stream::new(14, "rmse");
        let a = rng.gaussian_matrix(7, 5);
        let b = rng.gaussian_matrix(7, 5);
        let mask: Vec<bool> = (0..35).map(|i| i % 3 != 0).collect();
        let got = rmse_masked(&a, &b, &mask).unwrap();
        // independent accumulation
        let mut acc = 0.0;
        let mut cnt = 0;
        for i in 0..7 {
            for j in 0..5 {
                if mask[i * 5 + j] {
                    let d = a.get(i, j) - b.get(i, j);
                    acc += d * d;
                    cnt += 1;
                }
            }
        }
        let expect = (acc / cnt as f64).sqrt();
        assert!((got - expect).abs() <= 1e-12);
    }

    #[test]
    fn rmse_full_mask_equals_scaled_frobenius() {
        let mut rng = Stream::new(15, "rmse_full");
        let a = rng.gaussian_matrix(6, 9);
        let b = rng.gaussian_matrix(6, 9);
        let got = rmse_masked(&a, &b, &vec![true; 54]).unwrap();
        let expect = a.frobenius_distance(&b) / (54f64).sqrt();
        assert!((got - expect).abs() <= 1e-12);
    }

    #[test]
    fn alignment_perfect_and_orthogonal() {
        let n = 30;
        let mut rng = Stream::new(16, "align");
        let basis = orthonormal_columns(&rng.gaussian_matrix(n, n));
        let vals: Vec<f64> = (0..n).map(|i| (n - i) as f64).collect();
        let a = basis.mul(&DenseMatrix::from_diag(&vals)).mul_tr(&basis).symmetrized();
        let k = 5;
        let top = DenseMatrix::from_fn(n, k, |i, j| basis.get(i, j));
        let rep = energy_alignment(&a, &top).unwrap();
        assert!((rep.alignment_ratio - 1.0).abs() <= 1e-10, "{}", rep.alignment_ratio);
        let bottom = DenseMatrix::from_fn(n, k, |i, j| basis.get(i, n - k + j));
        let rep = energy_alignment(&a, &bottom).unwrap();
        assert!(rep.alignment_ratio <= 1e-10, "{}", rep.alignment_ratio);
        assert!(rep.eta.iter().all(|&e| e >= 0.0));
    }

    #[test]
    fn alignment_invariant_under_right_rotation() {
        let n = 24;
        let mut rng = Stream::new(18, "align_rot");
        let basis = orthonormal_columns(&rng.gaussian_matrix(n, n));
        let vals: Vec<f64> = (0..n).map(|i| ((n - i) as f64).powi(2)).collect();
        let a = basis.mul(&DenseMatrix::from_diag(&vals)).mul_tr(&basis).symmetrized();
        let p = rng.gaussian_matrix(n, 4);
        let rot = orthonormal_columns(&rng.gaussian_matrix(4, 4));
        let rotated = p.mul(&rot);
        let r1 = energy_alignment(&a, &p).unwrap();
        let r2 = energy_alignment(&a, &rotated).unwrap();
        assert!((r1.alignment_ratio - r2.alignment_ratio).abs() <= 1e-10);
    }

    #[test]
    fn alignment_rejects_asymmetric() {
        let a = DenseMatrix::from_rows(&[&[1.0, 0.5], &[0.0, 1.0]]).unwrap();
        let p = DenseMatrix::identity(2);
        assert!(matches!(energy_alignment(&a, &p), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn kappa_of_core_cases() {
        let t = FactorTriple::new(
            DenseMatrix::identity(3),
            DenseMatrix::identity(3),
            DenseMatrix::identity(3),
        )
        .unwrap();
        assert_eq!(kappa_of_core(&t), 1.0);
        let t = FactorTriple::new(
            DenseMatrix::identity(5),
            DenseMatrix::from_diag(&[1.0, 2.0, 3.0, 4.0, 5.0]),
            DenseMatrix::identity(5),
        )
        .unwrap();
        assert!((kappa_of_core(&t) - 5.0).abs() < 1e-12);
    }
}
