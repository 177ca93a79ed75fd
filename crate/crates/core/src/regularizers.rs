//! The regularization functional and the full objective.
//!
//! ```text
//! R(P, D, Q) = a1 ||P||_F^2 + a2 ||D||_F^2 + a3 ||Q||_F^2 + beta log kappa(D)
//! objective  = ||A - P D Q||_F^2 + lambda R(P, D, Q)
//! ```
//!
//! `lambda` multiplies the whole of `R`, so the effective weight of each
//! quadratic term inside the block updates is `lambda * a_i`. The
//! non-smooth `beta log kappa(D)` term has no closed-form update; it is
//! realized operationally by projecting the singular values of `D` onto a
//! bounded-condition set after each core update (see
//! [`crate::ddecomp::project_condition`]) while the penalty itself is
//! evaluated exactly in reported objective values.

use crate::ddecomp::FactorTriple;
use crate::error::{Error, Result};
use crate::linalg::condition_number;
use crate::matrix::DenseMatrix;

use serde::{Deserialize, Serialize};

/// Weights of the regularization functional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularizerConfig {
    /// Global weight multiplying the whole functional.
    pub lambda: f64,
    /// Frobenius weight on P.
    pub alpha1: f64,
    /// Frobenius weight on D.
    pub alpha2: f64,
    /// Frobenius weight on Q.
    pub alpha3: f64,
    /// Weight of the log-condition penalty on D.
    pub beta: f64,
    /// Condition cap realizing the beta term; `None` falls back to
    /// [`RegularizerConfig::DEFAULT_KAPPA_CAP`] whenever `beta > 0`.
    pub kappa_cap: Option<f64>,
}

impl RegularizerConfig {
    pub const DEFAULT_KAPPA_CAP: f64 = 1e4;

    /// All weights zero: plain unregularized least squares.
    pub fn unregularized() -> Self {
        RegularizerConfig { lambda: 0.0, alpha1: 0.0, alpha2: 0.0, alpha3: 0.0, beta: 0.0, kappa_cap: None }
    }

    /// Uniform quadratic weights `alpha` under global weight `lambda`, no
    /// condition penalty.
    pub fn uniform(lambda: f64, alpha: f64) -> Self {
        RegularizerConfig { lambda, alpha1: alpha, alpha2: alpha, alpha3: alpha, beta: 0.0, kappa_cap: None }
    }

    pub fn with_beta(mut self, beta: f64, kappa_cap: Option<f64>) -> Self {
        self.beta = beta;
        self.kappa_cap = kappa_cap;
        self
    }

    /// The condition cap in force: the configured cap, or the default when
    /// `beta > 0` and none is set.
    pub fn effective_kappa_cap(&self) -> Option<f64> {
        if self.beta > 0.0 {
            Some(self.kappa_cap.unwrap_or(Self::DEFAULT_KAPPA_CAP))
        } else {
            self.kappa_cap
        }
    }

    pub fn validate(&self) -> Result<()> {
        let weights = [self.lambda, self.alpha1, self.alpha2, self.alpha3, self.beta];
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::NonFiniteEntry {
                context: "regularizer weights must be finite and nonnegative".into(),
            });
        }
        if let Some(cap) = self.kappa_cap {
            if !(cap > 1.0) {
                return Err(Error::NonFiniteEntry {
                    context: format!("kappa_cap must be > 1, got {cap}"),
                });
            }
        }
        Ok(())
    }
}

impl Default for RegularizerConfig {
    fn default() -> Self {
        RegularizerConfig::unregularized()
    }
}

fn check_shapes(p: &DenseMatrix, d: &DenseMatrix, q: &DenseMatrix) -> Result<usize> {
    let k = p.cols();
    if !d.is_square() || d.rows() != k || q.rows() != k {
        return Err(Error::ShapeMismatch {
            op: "regularizer_value",
            expected: format!("P nx{k}, D {k}x{k}, Q {k}xm"),
            found: format!("{:?}, {:?}, {:?}", p.shape(), d.shape(), q.shape()),
        });
    }
    Ok(k)
}

/// `R(P, D, Q)`; the condition term is included only when `beta > 0` and
/// evaluates to `+inf` when `D` is singular.
pub fn regularizer_value(
    p: &DenseMatrix,
    d: &DenseMatrix,
    q: &DenseMatrix,
    cfg: &RegularizerConfig,
) -> Result<f64> {
    check_shapes(p, d, q)?;
    let np = p.frobenius_norm();
    let nd = d.frobenius_norm();
    let nq = q.frobenius_norm();
    let mut value = cfg.alpha1 * np * np + cfg.alpha2 * nd * nd + cfg.alpha3 * nq * nq;
    if cfg.beta > 0.0 {
        let kappa = condition_number(d);
        if kappa.is_infinite() {
            return Ok(f64::INFINITY);
        }
        value += cfg.beta * kappa.ln();
    }
    Ok(value)
}

/// `||A - P D Q||_F^2 + lambda R(P, D, Q)`.
pub fn objective(a: &DenseMatrix, triple: &FactorTriple, cfg: &RegularizerConfig) -> Result<f64> {
    check_shapes(&triple.p, &triple.d, &triple.q)?;
    if triple.p.rows() != a.rows() || triple.q.cols() != a.cols() {
        return Err(Error::ShapeMismatch {
            op: "objective",
            expected: format!("factors for {:?}", a.shape()),
            found: format!("P {:?}, Q {:?}", triple.p.shape(), triple.q.shape()),
        });
    }
    let fidelity = a.frobenius_distance(&triple.product());
    let reg = regularizer_value(&triple.p, &triple.d, &triple.q, cfg)?;
    Ok(fidelity * fidelity + cfg.lambda * reg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triple(p: DenseMatrix, d: DenseMatrix, q: DenseMatrix) -> FactorTriple {
        let k = d.rows();
        FactorTriple { p, d, q, k }
    }

    #[test]
    fn quadratic_terms_sum() {
        let p = DenseMatrix::identity(3);
        let d = DenseMatrix::from_diag(&[2.0, 3.0, 5.0]);
        let q = DenseMatrix::identity(3);
        let cfg = RegularizerConfig::uniform(1.0, 1.0);
        // 3 + 38 + 3
        let r = regularizer_value(&p, &d, &q, &cfg).unwrap();
        assert!((r - 44.0).abs() < 1e-12);
    }

    #[test]
    fn zero_factors_zero_value() {
        let z3 = DenseMatrix::zeros(3, 3);
        let cfg = RegularizerConfig::uniform(1.0, 1.0);
        let r = regularizer_value(&z3, &z3, &z3, &cfg).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn log_condition_term() {
        let p = DenseMatrix::identity(2);
        let d = DenseMatrix::from_diag(&[1.0, 10.0]);
        let q = DenseMatrix::identity(2);
        let cfg = RegularizerConfig {
            lambda: 1.0,
            alpha1: 0.0,
            alpha2: 0.0,
            alpha3: 0.0,
            beta: 1.0,
            kappa_cap: None,
        };
        let r = regularizer_value(&p, &d, &q, &cfg).unwrap();
        assert!((r - 10f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn singular_core_with_beta_is_infinite() {
        let p = DenseMatrix::identity(2);
        let d = DenseMatrix::zeros(2, 2);
        let q = DenseMatrix::identity(2);
        let cfg = RegularizerConfig::uniform(1.0, 0.0).with_beta(1.0, None);
        assert!(regularizer_value(&p, &d, &q, &cfg).unwrap().is_infinite());
    }

    #[test]
    fn objective_exact_factors() {
        let a = DenseMatrix::from_diag(&[2.0, 3.0, 5.0]);
        let t = triple(DenseMatrix::identity(3), a.clone(), DenseMatrix::identity(3));
        let zero = objective(&a, &t, &RegularizerConfig::unregularized()).unwrap();
        assert_eq!(zero, 0.0);
        // fidelity 0 plus regularizer 44
        let cfg = RegularizerConfig::uniform(1.0, 1.0);
        assert!((objective(&a, &t, &cfg).unwrap() - 44.0).abs() < 1e-12);
    }

    #[test]
    fn objective_zero_factors_is_input_energy() {
        let a = DenseMatrix::identity(2);
        let t = triple(DenseMatrix::zeros(2, 1), DenseMatrix::zeros(1, 1), DenseMatrix::zeros(1, 2));
        let v = objective(&a, &t, &RegularizerConfig::unregularized()).unwrap();
        assert!((v - 2.0).abs() < 1e-15);
    }

    #[test]
    fn shape_mismatch_reported() {
        let a = DenseMatrix::identity(3);
        let t = triple(DenseMatrix::zeros(3, 2), DenseMatrix::zeros(2, 2), DenseMatrix::zeros(2, 4));
        assert!(matches!(
            objective(&a, &t, &RegularizerConfig::unregularized()),
            Err(Error::ShapeMismatch { .. })
        ));
    }
}
