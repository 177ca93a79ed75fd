//! Reference low-rank methods: truncated SVD, randomized SVD, and CUR.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{orthonormal_columns, pseudo_inverse, svd, DEFAULT_RCOND};
use crate::matrix::DenseMatrix;
use crate::rng::Stream;

/// A rank-limited approximation together with how it was produced.
#[derive(Clone, Debug)]
pub struct LowRankApprox {
    pub approx: DenseMatrix,
    /// Upper bound on the numerical rank of `approx` (for CUR this is the
    /// number of sampled columns, not the requested target rank).
    pub rank: usize,
    pub method: String,
    pub metadata: ApproxMetadata,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ApproxMetadata {
    None,
    Cur { col_indices: Vec<usize>, row_indices: Vec<usize> },
}

fn check_rank(k: usize, limit: usize) -> Result<()> {
    if k < 1 || k > limit {
        return Err(Error::RankTooLarge { k, limit });
    }
    Ok(())
}

/// Best rank-k approximation `U_k diag(s_k) V_k^T` (Eckart-Young optimal).
pub fn truncated_svd(a: &DenseMatrix, k: usize) -> Result<LowRankApprox> {
    check_rank(k, a.rows().min(a.cols()))?;
    let r = svd(a)?;
    Ok(LowRankApprox {
        approx: r.truncated_product(k),
        rank: k,
        method: "truncated_svd".into(),
        metadata: ApproxMetadata::None,
    })
}

/// Randomized range finder with Gaussian test matrix of width
/// `k + oversample` and `power_iters` subspace iterations, each
/// re-orthonormalized, followed by a rank-k SVD of the projected matrix.
pub fn randomized_svd(
    a: &DenseMatrix,
    k: usize,
    oversample: usize,
    power_iters: usize,
    seed: u64,
) -> Result<LowRankApprox> {
    let (n, m) = a.shape();
    check_rank(k, n.min(m))?;
    let width = k + oversample;
    if width > n.min(m) {
        return Err(Error::RankTooLarge { k: width, limit: n.min(m) });
    }
    let mut rng = Stream::new(seed, "rsvd_omega");
    let omega = rng.gaussian_matrix(m, width);
    let mut q = orthonormal_columns(&a.mul(&omega));
    for _ in 0..power_iters {
        let z = orthonormal_columns(&a.tr_mul(&q));
        q = orthonormal_columns(&a.mul(&z));
    }
    let b = q.tr_mul(a); // width x m
    let rb = svd(&b)?;
    // U = Q * U_b, truncated to rank k
    let u_small = DenseMatrix::from_fn(width, k, |i, j| rb.u.get(i, j));
    let u = q.mul(&u_small);
    let mut approx = DenseMatrix::zeros(n, m);
    for i in 0..n {
        let row = approx.row_mut(i);
        for l in 0..k {
            let c = u.get(i, l) * rb.s[l];
            if c == 0.0 {
                continue;
            }
            for (o, &v) in row.iter_mut().zip(rb.vt.row(l)) {
                *o += c * v;
            }
        }
    }
    Ok(LowRankApprox {
        approx,
        rank: k,
        method: "randomized_svd".into(),
        metadata: ApproxMetadata::None,
    })
}

/// CUR with length-squared sampling: `k + oversample` columns and rows are
/// drawn without replacement with probability proportional to their squared
/// norms, and the core is `C+ A R+`.
pub fn cur(a: &DenseMatrix, k: usize, oversample: usize, seed: u64) -> Result<LowRankApprox> {
    let (n, m) = a.shape();
    let c = k + oversample;
    if k < 1 || c > n.min(m) {
        return Err(Error::RankTooLarge { k: c, limit: n.min(m) });
    }

    let mut col_w = vec![0.0f64; m];
    let mut row_w = vec![0.0f64; n];
    for i in 0..n {
        for (j, &v) in a.row(i).iter().enumerate() {
            col_w[j] += v * v;
            row_w[i] += v * v;
        }
    }
    let mut rng_cols = Stream::new(seed, "cur_cols");
    let mut rng_rows = Stream::new(seed, "cur_rows");
    let mut col_idx = rng_cols.sample_without_replacement(&col_w, c);
    let mut row_idx = rng_rows.sample_without_replacement(&row_w, c);
    col_idx.sort_unstable();
    row_idx.sort_unstable();

    let cmat = a.select_columns(&col_idx); // n x c
    let rmat = a.select_rows(&row_idx); // c x m
    let c_pinv = pseudo_inverse(&cmat, DEFAULT_RCOND); // c x n
    let r_pinv = pseudo_inverse(&rmat, DEFAULT_RCOND); // m x c
    let core = c_pinv.mul(a).mul(&r_pinv); // c x c
    let approx = cmat.mul(&core).mul(&rmat);

    Ok(LowRankApprox {
        approx,
        rank: c,
        method: "cur".into(),
        metadata: ApproxMetadata::Cur { col_indices: col_idx, row_indices: row_idx },
    })
}
