//! Seeded synthetic matrix classes and the fixed small examples.
//!
//! Every generator is a pure function of its parameters and seed; random
//! draws go through named [`crate::rng::Stream`]s so matrices are
//! bit-reproducible across runs and platforms.

use serde::{Deserialize, Serialize};

use crate::ddecomp::FactorTriple;
use crate::error::{Error, Result};
use crate::linalg::orthonormal_columns;
use crate::matrix::DenseMatrix;
use crate::rng::Stream;

/// Declarative description of a synthetic matrix, usable in config files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    LowRank { n: usize, k: usize, seed: u64 },
    NoisySparse { n: usize, k: usize, density: f64, sigma_noise: f64, seed: u64 },
    IllConditioned { n: usize, k: usize, seed: u64 },
    SpectralDecay { n: usize, seed: u64 },
    /// A base spec plus Gaussian noise rescaled to Frobenius norm `eps`.
    Perturbed { base: Box<GeneratorSpec>, eps: f64, seed: u64 },
    PaperExample { example_id: String },
}

impl GeneratorSpec {
    pub fn label(&self) -> String {
        match self {
            GeneratorSpec::LowRank { .. } => "low_rank".into(),
            GeneratorSpec::NoisySparse { .. } => "noisy_sparse".into(),
            GeneratorSpec::IllConditioned { .. } => "ill_conditioned".into(),
            GeneratorSpec::SpectralDecay { .. } => "spectral_decay".into(),
            GeneratorSpec::Perturbed { base, .. } => format!("perturbed_{}", base.label()),
            GeneratorSpec::PaperExample { example_id } => format!("paper_{example_id}"),
        }
    }

    /// Replace every embedded seed (used to fan one experiment seed out
    /// over repeated cells).
    pub fn with_seed(&self, seed: u64) -> GeneratorSpec {
        let mut s = self.clone();
        s.set_seed(seed);
        s
    }

    fn set_seed(&mut self, new: u64) {
        match self {
            GeneratorSpec::LowRank { seed, .. }
            | GeneratorSpec::NoisySparse { seed, .. }
            | GeneratorSpec::IllConditioned { seed, .. }
            | GeneratorSpec::SpectralDecay { seed, .. } => *seed = new,
            GeneratorSpec::Perturbed { base, seed, .. } => {
                *seed = new;
                base.set_seed(new ^ 0x5DEE_CE66);
            }
            GeneratorSpec::PaperExample { .. } => {}
        }
    }
}

/// A generated matrix plus, when the class defines them, the clean base
/// matrix (before noise) and a ground-truth factorization.
#[derive(Clone, Debug)]
pub struct Generated {
    pub matrix: DenseMatrix,
    pub clean: Option<DenseMatrix>,
    pub truth: Option<FactorTriple>,
}

/// Realize a generator spec.
pub fn generate(spec: &GeneratorSpec) -> Result<Generated> {
    match spec {
        GeneratorSpec::LowRank { n, k, seed } => {
            Ok(Generated { matrix: gen_low_rank(*n, *k, *seed)?, clean: None, truth: None })
        }
        GeneratorSpec::NoisySparse { n, k, density, sigma_noise, seed } => {
            let (matrix, base) = gen_noisy_sparse(*n, *k, *density, *sigma_noise, *seed)?;
            Ok(Generated { matrix, clean: Some(base), truth: None })
        }
        GeneratorSpec::IllConditioned { n, k, seed } => {
            Ok(Generated { matrix: gen_ill_conditioned(*n, *k, *seed)?, clean: None, truth: None })
        }
        GeneratorSpec::SpectralDecay { n, seed } => {
            Ok(Generated { matrix: gen_spectral_decay(*n, *seed), clean: None, truth: None })
        }
        GeneratorSpec::Perturbed { base, eps, seed } => {
            let inner = generate(base)?;
            let matrix = gen_perturbed(&inner.matrix, *eps, *seed);
            Ok(Generated { matrix, clean: Some(inner.matrix), truth: inner.truth })
        }
        GeneratorSpec::PaperExample { example_id } => {
            let (matrix, truth) = paper_example(example_id)?;
            Ok(Generated { matrix, clean: None, truth })
        }
    }
}

/// `A = U V^T` with orthonormal n x k factors: exactly rank k, all
/// singular values 1.
pub fn gen_low_rank(n: usize, k: usize, seed: u64) -> Result<DenseMatrix> {
    if k < 1 || k > n {
        return Err(Error::RankTooLarge { k, limit: n });
    }
    let mut su = Stream::new(seed, "lowrank_u");
    let mut sv = Stream::new(seed, "lowrank_v");
    let u = orthonormal_columns(&su.gaussian_matrix(n, k));
    let v = orthonormal_columns(&sv.gaussian_matrix(n, k));
    Ok(u.mul_tr(&v))
}

/// Span of the sparse base spectrum in decades (sigma_1 / sigma_k ~ 10^3).
const SPARSE_DECAY_DECADES: f64 = 3.0;
/// Per-entry RMS the sparse base is normalized to; against the reference
/// sigma = 1e-2 noise this puts the class at Frobenius SNR ~ 16.
const SPARSE_BASE_RMS: f64 = 0.16;

/// Sparse rank-k base plus dense Gaussian noise.
///
/// The base is a product of sparse factors `X diag(w) Y` whose per-factor
/// density is chosen so the product hits the target density, with a
/// three-decade geometric weight profile `w`; it is then normalized to a
/// fixed per-entry RMS. Returns `(noisy, base)`.
pub fn gen_noisy_sparse(
    n: usize,
    k: usize,
    density: f64,
    sigma_noise: f64,
    seed: u64,
) -> Result<(DenseMatrix, DenseMatrix)> {
    if k < 1 || k > n {
        return Err(Error::RankTooLarge { k, limit: n });
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::NonFiniteEntry {
            context: format!("density must be in (0, 1], got {density}"),
        });
    }
    // factor density so that P(entry of X diag(w) Y is nonzero) = density
    let factor_density = (1.0 - (1.0 - density).powf(1.0 / k as f64)).sqrt().min(1.0);
    let mut sx = Stream::new(seed, "sparse_x");
    let mut sy = Stream::new(seed, "sparse_y");
    let sparse_factor = |s: &mut Stream, rows: usize, cols: usize| {
        DenseMatrix::from_fn(rows, cols, |_, _| {
            let keep = s.uniform() < factor_density;
            let g = s.gaussian();
            if keep {
                g
            } else {
                0.0
            }
        })
    };
    let x = sparse_factor(&mut sx, n, k);
    let y = sparse_factor(&mut sy, k, n);
    let weights: Vec<f64> = (0..k)
        .map(|i| {
            if k == 1 {
                1.0
            } else {
                10f64.powf(-SPARSE_DECAY_DECADES * i as f64 / (k - 1) as f64)
            }
        })
        .collect();
    let mut base = x.mul(&DenseMatrix::from_diag(&weights)).mul(&y);
    let norm = base.frobenius_norm();
    if norm > 0.0 {
        base.scale_mut(SPARSE_BASE_RMS * n as f64 / norm);
    }

    let mut noisy = base.clone();
    if sigma_noise != 0.0 {
        let mut sn = Stream::new(seed, "sparse_noise");
        for v in noisy.as_mut_slice() {
            *v += sigma_noise * sn.gaussian();
        }
    }
    Ok((noisy, base))
}

/// `A = U Sigma V^T` with the geometric spectrum
/// `sigma_i = 10^(-6(i-1)/(k-1))`, so kappa over the rank-k spectrum is 1e6.
pub fn gen_ill_conditioned(n: usize, k: usize, seed: u64) -> Result<DenseMatrix> {
    if k < 2 || k > n {
        return Err(Error::RankTooLarge { k: k.max(2), limit: n });
    }
    let mut su = Stream::new(seed, "illcond_u");
    let mut sv = Stream::new(seed, "illcond_v");
    let u = orthonormal_columns(&su.gaussian_matrix(n, k));
    let v = orthonormal_columns(&sv.gaussian_matrix(n, k));
    let sigma: Vec<f64> = (0..k)
        .map(|i| 10f64.powf(-6.0 * i as f64 / (k - 1) as f64))
        .collect();
    Ok(u.mul(&DenseMatrix::from_diag(&sigma)).mul_tr(&v))
}

/// Symmetric PSD matrix with exact spectrum `exp(-i/10)`, i = 1..n, in a
/// seeded random orthonormal eigenbasis.
pub fn gen_spectral_decay(n: usize, seed: u64) -> DenseMatrix {
    let mut s = Stream::new(seed, "specdecay_u");
    let u = orthonormal_columns(&s.gaussian_matrix(n, n));
    let vals: Vec<f64> = (1..=n).map(|i| (-(i as f64) / 10.0).exp()).collect();
    let a = u.mul(&DenseMatrix::from_diag(&vals)).mul_tr(&u);
    a.symmetrized()
}

/// `a0 + E` with Gaussian `E` rescaled so `||E||_F = eps` exactly.
pub fn gen_perturbed(a0: &DenseMatrix, eps: f64, seed: u64) -> DenseMatrix {
    assert!(eps >= 0.0, "gen_perturbed: eps must be nonnegative");
    if eps == 0.0 {
        return a0.clone();
    }
    let mut s = Stream::new(seed, "perturb");
    let mut e = s.gaussian_matrix(a0.rows(), a0.cols());
    let norm = e.frobenius_norm();
    e.scale_mut(eps / norm);
    a0.add(&e)
}

/// The verbatim matrices of the paper's worked examples, with ground-truth
/// factors attached where they are printed.
pub fn paper_example(example_id: &str) -> Result<(DenseMatrix, Option<FactorTriple>)> {
    match example_id {
        "ex31" => {
            let u = DenseMatrix::from_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 0.0], &[0.0, 1.0]])?;
            let d = DenseMatrix::from_diag(&[3.0, 1.0]);
            let a = u.mul(&d).mul_tr(&u);
            let truth = FactorTriple::new(u.clone(), d, u.transpose())?;
            Ok((a, Some(truth)))
        }
        "ex34" => {
            let a = DenseMatrix::from_diag(&[2.0, 3.0, 5.0]);
            let truth =
                FactorTriple::new(DenseMatrix::identity(3), a.clone(), DenseMatrix::identity(3))?;
            Ok((a, Some(truth)))
        }
        "ex35" => {
            let u = DenseMatrix::from_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]])?;
            let d = DenseMatrix::from_diag(&[4.0, 1.0]);
            let a = u.mul(&d).mul_tr(&u);
            let truth = FactorTriple::new(u.clone(), d, u.transpose())?;
            Ok((a, Some(truth)))
        }
        "ex36_base" => {
            let u = [1.0, 2.0, 1.0];
            let v = [3.0, 0.0, -1.0];
            let a = DenseMatrix::from_fn(3, 3, |i, j| u[i] * v[j]);
            let p = DenseMatrix::from_fn(3, 1, |i, _| u[i]);
            let d = DenseMatrix::from_diag(&[1.0]);
            let q = DenseMatrix::from_fn(1, 3, |_, j| v[j]);
            let truth = FactorTriple::new(p, d, q)?;
            Ok((a, Some(truth)))
        }
        "ex37" => {
            let p = DenseMatrix::from_rows(&[
                &[1.0, 2.0, 1.0, 3.0, 1.0],
                &[2.0, 1.0, 2.0, 1.0, 2.0],
                &[3.0, 2.0, 1.0, 2.0, 3.0],
                &[1.0, 1.0, 3.0, 1.0, 1.0],
                &[2.0, 3.0, 1.0, 2.0, 1.0],
            ])?;
            let d = DenseMatrix::from_diag(&[1.0, 2.0, 3.0, 4.0, 5.0]);
            let q = DenseMatrix::from_rows(&[
                &[1.0, 1.0, 1.0, 1.0, 1.0],
                &[2.0, 1.0, 2.0, 2.0, 1.0],
                &[1.0, 3.0, 1.0, 2.0, 1.0],
                &[1.0, 1.0, 2.0, 1.0, 3.0],
                &[2.0, 1.0, 1.0, 1.0, 2.0],
            ])?;
            let a = p.mul(&d.mul(&q));
            let truth = FactorTriple::new(p, d, q)?;
            Ok((a, Some(truth)))
        }
        other => Err(Error::UnknownExample(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::svd;

    #[test]
    fn low_rank_has_exact_rank_and_gap() {
        let a = gen_low_rank(40, 6, 12).unwrap();
        let r = svd(&a).unwrap();
        assert!(r.s[5] > 0.999999);
        assert!(r.s[6] / r.s[0] <= 1e-10, "gap {}", r.s[6] / r.s[0]);
        // square orthonormal factors give a full-rank matrix
        let b = gen_low_rank(8, 8, 12).unwrap();
        let rb = svd(&b).unwrap();
        assert!(rb.s[7] > 0.999999);
    }

    #[test]
    fn generators_are_deterministic() {
        let a = gen_low_rank(20, 4, 5).unwrap();
        let b = gen_low_rank(20, 4, 5).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
        let (x1, _) = gen_noisy_sparse(20, 4, 0.2, 1e-2, 5).unwrap();
        let (x2, _) = gen_noisy_sparse(20, 4, 0.2, 1e-2, 5).unwrap();
        assert_eq!(x1.as_slice(), x2.as_slice());
        let c = gen_perturbed(&a, 1e-3, 6);
        let d = gen_perturbed(&a, 1e-3, 6);
        assert_eq!(c.as_slice(), d.as_slice());
    }

    #[test]
    fn noisy_sparse_density_and_rank() {
        let n = 120;
        let (noisy, base) = gen_noisy_sparse(n, 12, 0.05, 0.0, 3).unwrap();
        assert_eq!(noisy.as_slice(), base.as_slice());
        let nonzero = base.as_slice().iter().filter(|v| **v != 0.0).count();
        let frac = nonzero as f64 / (n * n) as f64;
        assert!((frac - 0.05).abs() <= 0.01, "density {frac}");
        let r = svd(&base).unwrap();
        assert!(r.s[12] / r.s[0] <= 1e-12, "rank leak {}", r.s[12] / r.s[0]);
    }

    #[test]
    fn noisy_sparse_noise_magnitude() {
        let n = 100;
        let (noisy, base) = gen_noisy_sparse(n, 10, 0.05, 1e-2, 9).unwrap();
        let ratio = noisy.frobenius_distance(&base) / n as f64;
        assert!((ratio - 1e-2).abs() / 1e-2 < 0.2, "noise level {ratio}");
    }

    #[test]
    fn ill_conditioned_spectrum() {
        let a = gen_ill_conditioned(60, 50, 4).unwrap();
        let r = svd(&a).unwrap();
        assert!((r.s[0] / r.s[49] - 1e6).abs() / 1e6 < 1e-6);
        // formula midpoint: sigma_25 / sigma_1 = 10^(-6*24/49)
        let expect = 10f64.powf(-6.0 * 24.0 / 49.0);
        assert!((r.s[24] - expect).abs() / expect < 1e-9);
        let b = gen_ill_conditioned(10, 2, 4).unwrap();
        let rb = svd(&b).unwrap();
        assert!((rb.s[0] - 1.0).abs() < 1e-12);
        assert!((rb.s[1] - 1e-6).abs() / 1e-6 < 1e-9);
    }

    #[test]
    fn spectral_decay_symmetric_with_exact_spectrum() {
        let a = gen_spectral_decay(30, 8);
        assert!(a.symmetry_deviation() <= 1e-12);
        let r = svd(&a).unwrap();
        for (i, &s) in r.s.iter().enumerate() {
            let expect = (-(i as f64 + 1.0) / 10.0).exp();
            assert!((s - expect).abs() <= 1e-10, "sigma_{i} = {s} vs {expect}");
        }
    }

    #[test]
    fn perturbed_norm_is_exact() {
        let a0 = gen_low_rank(25, 5, 2).unwrap();
        assert_eq!(gen_perturbed(&a0, 0.0, 3).as_slice(), a0.as_slice());
        let a = gen_perturbed(&a0, 1e-3, 3);
        let dist = a.frobenius_distance(&a0);
        assert!((dist - 1e-3).abs() <= 1e-12, "eps {dist}");
    }

    #[test]
    fn paper_examples_match_their_factors() {
        for id in ["ex31", "ex34", "ex35", "ex36_base", "ex37"] {
            let (a, truth) = paper_example(id).unwrap();
            let t = truth.expect("ground truth printed in every example");
            assert!(a.frobenius_distance(&t.product()) <= 1e-12, "{id}");
        }
        let (a, _) = paper_example("ex34").unwrap();
        assert_eq!(a, DenseMatrix::from_diag(&[2.0, 3.0, 5.0]));
        let (a, _) = paper_example("ex36_base").unwrap();
        let expect = DenseMatrix::from_rows(&[
            &[3.0, 0.0, -1.0],
            &[6.0, 0.0, -2.0],
            &[3.0, 0.0, -1.0],
        ])
        .unwrap();
        assert_eq!(a, expect);
        assert!(matches!(paper_example("ex99"), Err(Error::UnknownExample(_))));
    }

    #[test]
    fn ex37_is_dense_and_full_rank() {
        let (a, _) = paper_example("ex37").unwrap();
        assert!(a.as_slice().iter().all(|&v| v != 0.0));
        let r = svd(&a).unwrap();
        assert!(r.s[4] / r.s[0] > 1e-6);
    }
}
