//! Minimal dense linear-algebra kernel.
//!
//! Exactly the primitives the solver, baselines, and metrics need:
//! SPD solves (Cholesky), SVD (one-sided Jacobi), symmetric
//! eigendecomposition (two-sided Jacobi), thin QR orthonormalization
//! (Householder), Moore-Penrose pseudoinverse, condition numbers, and the
//! Sylvester-type solve used by the core-matrix update. All routines are
//! pure functions of their inputs and deterministic.

mod cholesky;
mod eigen;
mod qr;
mod svd;
mod sylvester;

pub use cholesky::solve_spd;
pub use eigen::sym_eigen;
pub use qr::orthonormal_columns;
pub use svd::{condition_number, pseudo_inverse, svd, SvdResult};
pub use sylvester::solve_sylvester_diag;

/// Default relative cutoff for pseudoinverse singular values.
pub const DEFAULT_RCOND: f64 = 1e-12;
