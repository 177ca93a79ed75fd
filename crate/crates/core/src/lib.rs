//! Variational D-decomposition `A ~ P D Q` and its experiment suite.
//!
//! The decomposition is defined by minimizing a regularized Frobenius loss
//! rather than by algebraic construction, and is computed by alternating
//! minimization over the three factor blocks. The crate bundles:
//!
//! - [`linalg`]: the dense kernels everything rests on (Cholesky solves,
//!   Jacobi SVD and eigendecompositions, thin QR, pseudoinverse);
//! - [`regularizers`]: the penalty functional and the full objective,
//!   including the log-condition term on the core matrix;
//! - [`ddecomp`]: initialization, block updates, the alternating loop with
//!   convergence tracking, condition projection, and gauge normalization;
//! - [`baselines`]: truncated SVD, randomized SVD, and CUR for comparison;
//! - [`generators`]: seeded synthetic matrix classes and fixed small
//!   examples with known ground truth;
//! - [`metrics`]: relative Frobenius error, masked RMSE, core condition
//!   number, and spectral energy alignment;
//! - [`experiments`]: benchmark, perturbation, ablation, sensitivity,
//!   stability, and runtime-scaling protocols producing structured reports;
//! - [`io`]: MatrixMarket/CSV matrix files, factor files, and JSON reports.
//!
//! Everything randomized is driven by explicit seeds through a pinned,
//! portable generator ([`rng`]), so runs are reproducible bit-for-bit.

pub mod baselines;
pub mod ddecomp;
mod error;
pub mod experiments;
pub mod generators;
pub mod io;
pub mod linalg;
mod matrix;
pub mod metrics;
pub mod regularizers;
pub mod rng;

pub use error::{Error, Result};
pub use matrix::DenseMatrix;
