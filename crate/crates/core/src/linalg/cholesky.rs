use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Solve `M X = RHS` for symmetric positive definite `M` via Cholesky.
///
/// `M` must be symmetric to within `1e-10` relative; a non-positive pivot
/// reports `NotPositiveDefinite`, which in solver context usually signals
/// missing regularization.
pub fn solve_spd(m: &DenseMatrix, rhs: &DenseMatrix) -> Result<DenseMatrix> {
    let k = m.rows();
    if !m.is_square() || rhs.rows() != k {
        return Err(Error::ShapeMismatch {
            op: "solve_spd",
            expected: format!("{k}x{k} and {k}xC"),
            found: format!("{:?} and {:?}", m.shape(), rhs.shape()),
        });
    }
    let dev = m.symmetry_deviation();
    if dev > 1e-10 {
        return Err(Error::NotSymmetric { deviation: dev });
    }

    // lower-triangular factor, row-major
    let mut l = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let mut acc = m.get(i, j);
            for p in 0..j {
                acc -= l[i * k + p] * l[j * k + p];
            }
            if i == j {
                if acc <= 0.0 {
                    return Err(Error::NotPositiveDefinite { pivot: acc, index: i });
                }
                l[i * k + i] = acc.sqrt();
            } else {
                l[i * k + j] = acc / l[j * k + j];
            }
        }
    }

    // forward then backward substitution, all right-hand sides at once
    let c = rhs.cols();
    let mut x = rhs.clone();
    for i in 0..k {
        for j in 0..i {
            let lij = l[i * k + j];
            if lij != 0.0 {
                let (head, tail) = x.as_mut_slice().split_at_mut(i * c);
                let xj = &head[j * c..(j + 1) * c];
                let xi = &mut tail[..c];
                for (a, &b) in xi.iter_mut().zip(xj) {
                    *a -= lij * b;
                }
            }
        }
        let d = l[i * k + i];
        for a in &mut x.as_mut_slice()[i * c..(i + 1) * c] {
            *a /= d;
        }
    }
    for i in (0..k).rev() {
        for j in (i + 1)..k {
            let lji = l[j * k + i];
            if lji != 0.0 {
                let (head, tail) = x.as_mut_slice().split_at_mut(j * c);
                let xi = &mut head[i * c..(i + 1) * c];
                let xj = &tail[..c];
                for (a, &b) in xi.iter_mut().zip(xj) {
                    *a -= lji * b;
                }
            }
        }
        let d = l[i * k + i];
        for a in &mut x.as_mut_slice()[i * c..(i + 1) * c] {
            *a /= d;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_system_returns_rhs() {
        let i3 = DenseMatrix::identity(3);
        let b = DenseMatrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]).unwrap();
        let x = solve_spd(&i3, &b).unwrap();
        assert_eq!(x.as_slice(), b.as_slice());
    }

    #[test]
    fn diagonal_solve() {
        let m = DenseMatrix::from_diag(&[2.0, 4.0]);
        let rhs = DenseMatrix::from_rows(&[&[2.0], &[8.0]]).unwrap();
        let x = solve_spd(&m, &rhs).unwrap();
        assert!((x.get(0, 0) - 1.0).abs() < 1e-15);
        assert!((x.get(1, 0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_indefinite() {
        let m = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
        let rhs = DenseMatrix::zeros(2, 1);
        assert!(matches!(
            solve_spd(&m, &rhs),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn rejects_asymmetric() {
        let m = DenseMatrix::from_rows(&[&[1.0, 0.5], &[0.0, 1.0]]).unwrap();
        let rhs = DenseMatrix::zeros(2, 1);
        assert!(matches!(solve_spd(&m, &rhs), Err(Error::NotSymmetric { .. })));
    }
}
