//! Dense row-major matrix type used throughout the crate.
//!
//! `DenseMatrix` is a flat `Vec<f64>` in row-major order. It is the carrier
//! for input matrices, factors, and every intermediate. All constructors
//! that accept user data reject non-finite entries; arithmetic helpers are
//! written so the inner loops run over contiguous slices.

use crate::error::{Error, Result};

/// Dot product with four independent accumulators so the FP adds pipeline.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    let chunks = n / 4;
    for i in 0..chunks {
        let j = 4 * i;
        s0 += a[j] * b[j];
        s1 += a[j + 1] * b[j + 1];
        s2 += a[j + 2] * b[j + 2];
        s3 += a[j + 3] * b[j + 3];
    }
    let mut rest = 0.0;
    for j in (4 * chunks)..n {
        rest += a[j] * b[j];
    }
    (s0 + s1) + (s2 + s3) + rest
}

/// Real dense matrix, row-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be >= 1");
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Build from a flat row-major vector, validating length and finiteness.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows < 1 || cols < 1 || data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                op: "from_vec",
                expected: format!("{rows}x{cols} = {} entries", rows * cols),
                found: format!("{} entries", data.len()),
            });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteEntry {
                context: format!("entry ({}, {})", pos / cols, pos % cols),
            });
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Build from nested row slices (handy for fixtures).
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::ShapeMismatch {
                    op: "from_rows",
                    expected: format!("row length {c}"),
                    found: format!("row length {}", row.len()),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_vec(r, c, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in d.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn diag(&self) -> Vec<f64> {
        let n = self.rows.min(self.cols);
        (0..n).map(|i| self.data[i * self.cols + i]).collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// `self * other`. Loop order keeps all inner accesses contiguous.
    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "mul: inner dimensions differ");
        let (m, k, n) = (self.rows, self.cols, other.cols);
        let mut out = Self::zeros(m, n);
        for i in 0..m {
            let a_row = &self.data[i * k..(i + 1) * k];
            let c_row = &mut out.data[i * n..(i + 1) * n];
            for (l, &a) in a_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let b_row = &other.data[l * n..(l + 1) * n];
                for (c, &b) in c_row.iter_mut().zip(b_row) {
                    *c += a * b;
                }
            }
        }
        out
    }

    /// `self^T * other` without materializing the transpose.
    pub fn tr_mul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.rows, other.rows, "tr_mul: leading dimensions differ");
        let (m, k, n) = (self.cols, self.rows, other.cols);
        let mut out = Self::zeros(m, n);
        for l in 0..k {
            let a_row = &self.data[l * m..(l + 1) * m];
            let b_row = &other.data[l * n..(l + 1) * n];
            for (i, &a) in a_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let c_row = &mut out.data[i * n..(i + 1) * n];
                for (c, &b) in c_row.iter_mut().zip(b_row) {
                    *c += a * b;
                }
            }
        }
        out
    }

    /// `self * other^T`; each output entry is a dot of two contiguous rows.
    pub fn mul_tr(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.cols, "mul_tr: trailing dimensions differ");
        let (m, k, n) = (self.rows, self.cols, other.rows);
        let mut out = Self::zeros(m, n);
        for i in 0..m {
            let a_row = &self.data[i * k..(i + 1) * k];
            for j in 0..n {
                let b_row = &other.data[j * k..(j + 1) * k];
                out.data[i * n + j] = dot(a_row, b_row);
            }
        }
        out
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.shape(), other.shape(), "add: shapes differ");
        let mut out = self.clone();
        for (c, &b) in out.data.iter_mut().zip(&other.data) {
            *c += b;
        }
        out
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.shape(), other.shape(), "sub: shapes differ");
        let mut out = self.clone();
        for (c, &b) in out.data.iter_mut().zip(&other.data) {
            *c -= b;
        }
        out
    }

    pub fn scale(&self, s: f64) -> DenseMatrix {
        let mut out = self.clone();
        for c in out.data.iter_mut() {
            *c *= s;
        }
        out
    }

    pub fn scale_mut(&mut self, s: f64) {
        for c in self.data.iter_mut() {
            *c *= s;
        }
    }

    /// Add `s` to each diagonal entry (square matrices).
    pub fn add_diag_mut(&mut self, s: f64) {
        assert!(self.is_square(), "add_diag_mut: matrix must be square");
        let n = self.rows;
        for i in 0..n {
            self.data[i * n + i] += s;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `||self - other||_F` without allocating the difference.
    pub fn frobenius_distance(&self, other: &DenseMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "frobenius_distance: shapes differ");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &x| m.max(x.abs()))
    }

    /// Relative symmetry deviation `||A - A^T||_F / ||A||_F` (0 for zero matrix).
    pub fn symmetry_deviation(&self) -> f64 {
        assert!(self.is_square(), "symmetry_deviation: matrix must be square");
        let n = self.rows;
        let mut dev = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.data[i * n + j] - self.data[j * n + i];
                dev += d * d;
            }
        }
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            0.0
        } else {
            (2.0 * dev).sqrt() / norm
        }
    }

    /// Symmetrized copy `(A + A^T) / 2`.
    pub fn symmetrized(&self) -> DenseMatrix {
        assert!(self.is_square(), "symmetrized: matrix must be square");
        let n = self.rows;
        DenseMatrix::from_fn(n, n, |i, j| 0.5 * (self.data[i * n + j] + self.data[j * n + i]))
    }

    /// Columns gathered by index into a new matrix.
    pub fn select_columns(&self, idx: &[usize]) -> DenseMatrix {
        let mut out = Self::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            for (jj, &j) in idx.iter().enumerate() {
                out.data[i * idx.len() + jj] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// Rows gathered by index into a new matrix.
    pub fn select_rows(&self, idx: &[usize]) -> DenseMatrix {
        let mut out = Self::zeros(idx.len(), self.cols);
        for (ii, &i) in idx.iter().enumerate() {
            out.row_mut(ii).copy_from_slice(self.row(i));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frobenius_norm_cases() {
        let z = DenseMatrix::zeros(3, 3);
        assert_eq!(z.frobenius_norm(), 0.0);
        let i4 = DenseMatrix::identity(4);
        assert_eq!(i4.frobenius_norm(), 2.0);
        let d = DenseMatrix::from_diag(&[3.0, 1.0]);
        assert!((d.frobenius_norm() - 10.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_finite() {
        let err = DenseMatrix::from_vec(1, 2, vec![1.0, f64::NAN]);
        assert!(matches!(err, Err(Error::NonFiniteEntry { .. })));
        let err = DenseMatrix::from_vec(1, 2, vec![f64::INFINITY, 0.0]);
        assert!(matches!(err, Err(Error::NonFiniteEntry { .. })));
    }

    #[test]
    fn mul_variants_agree() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[&[7.0, 8.0], &[9.0, 10.0], &[11.0, 12.0]]).unwrap();
        let ab = a.mul(&b);
        assert_eq!(ab.get(0, 0), 58.0);
        assert_eq!(ab.get(1, 1), 154.0);
        let at = a.transpose();
        assert_eq!(at.tr_mul(&b).as_slice(), ab.as_slice());
        let bt = b.transpose();
        assert_eq!(a.mul_tr(&bt).as_slice(), ab.as_slice());
    }

    #[test]
    fn select_rows_cols() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]).unwrap();
        let c = a.select_columns(&[1]);
        assert_eq!(c.as_slice(), &[2.0, 4.0, 6.0]);
        let r = a.select_rows(&[2, 0]);
        assert_eq!(r.as_slice(), &[5.0, 6.0, 1.0, 2.0]);
    }
}
