use crate::matrix::DenseMatrix;

/// Orthonormal basis for the column space of `a` (thin Householder QR).
///
/// Input is m x n with m >= n; output is m x n with orthonormal columns.
/// Columns are sign-fixed so the corresponding R diagonal is non-negative,
/// making the basis unique for full-rank input.
pub fn orthonormal_columns(a: &DenseMatrix) -> DenseMatrix {
    let (m, n) = a.shape();
    assert!(m >= n, "orthonormal_columns: need rows >= cols");
    let mut w = a.clone(); // holds reflectors below the diagonal
    let mut betas = vec![0.0; n];

    for j in 0..n {
        // Householder vector for column j, Golub & Van Loan style:
        // v = [1, x_tail / v0], H = I - beta * v v^T
        let alpha = w.get(j, j);
        let mut sigma = 0.0;
        for i in (j + 1)..m {
            sigma += w.get(i, j) * w.get(i, j);
        }
        if sigma == 0.0 {
            betas[j] = 0.0;
            continue;
        }
        let mu = (alpha * alpha + sigma).sqrt();
        let v0 = if alpha <= 0.0 { alpha - mu } else { -sigma / (alpha + mu) };
        let beta = 2.0 * v0 * v0 / (sigma + v0 * v0);
        for i in (j + 1)..m {
            let v = w.get(i, j) / v0;
            w.set(i, j, v);
        }
        betas[j] = beta;
        // apply H to the trailing columns
        for c in (j + 1)..n {
            let mut dot = w.get(j, c);
            for i in (j + 1)..m {
                dot += w.get(i, j) * w.get(i, c);
            }
            dot *= beta;
            w.set(j, c, w.get(j, c) - dot);
            for i in (j + 1)..m {
                let v = w.get(i, j);
                w.set(i, c, w.get(i, c) - dot * v);
            }
        }
        w.set(j, j, if alpha <= 0.0 { mu } else { -mu });
    }

    // accumulate Q = H_0 ... H_{n-1} [I_n; 0] by applying reflectors backwards
    let mut q = DenseMatrix::zeros(m, n);
    for j in 0..n {
        q.set(j, j, 1.0);
    }
    for j in (0..n).rev() {
        let beta = betas[j];
        if beta == 0.0 {
            continue;
        }
        for c in 0..n {
            let mut dot = q.get(j, c);
            for i in (j + 1)..m {
                dot += w.get(i, j) * q.get(i, c);
            }
            dot *= beta;
            q.set(j, c, q.get(j, c) - dot);
            for i in (j + 1)..m {
                let v = w.get(i, j);
                q.set(i, c, q.get(i, c) - dot * v);
            }
        }
    }

    // sign convention: R_jj = q_j . a_j >= 0
    for j in 0..n {
        let mut d = 0.0;
        for i in 0..m {
            d += q.get(i, j) * a.get(i, j);
        }
        if d < 0.0 {
            for i in 0..m {
                q.set(i, j, -q.get(i, j));
            }
        }
    }
    q
}
