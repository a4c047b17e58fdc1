//! The equicorrelated covariance matrix `A` (unit diagonal, common
//! off-diagonal `ρ`), its closed-form inverse, a common-factor sampler, and
//! the Frobenius-norm bound on the total variation distance between the
//! block-dependent and block-independent Gaussian laws.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng;

/// Dimension `n` and common correlation `ρ`, with `−1/(n−1) < ρ < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquicorrelatedSpec {
    n: usize,
    rho: f64,
}

impl EquicorrelatedSpec {
    pub fn new(n: usize, rho: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("dimension n must be >= 1"));
        }
        let lower = if n == 1 {
            f64::NEG_INFINITY
        } else {
            -1.0 / (n - 1) as f64
        };
        if !(rho > lower && rho < 1.0) {
            return Err(Error::domain(format!(
                "rho outside (-1/(n-1), 1): n = {n}, rho = {rho}"
            )));
        }
        Ok(Self { n, rho })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `(1 + (n−1)ρ, 1 − ρ)`: the simple and the `(n−1)`-fold eigenvalue of `A`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        (1.0 + (self.n as f64 - 1.0) * self.rho, 1.0 - self.rho)
    }
}

/// `n × n` matrix with ones on the diagonal and `ρ` elsewhere.
pub fn covariance_matrix(spec: &EquicorrelatedSpec) -> DMatrix<f64> {
    let n = spec.n();
    DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { spec.rho() })
}

/// The inverse of `A` has the same pattern: `alpha` on the diagonal and
/// `beta` off it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InverseDiagonalPair {
    pub alpha: f64,
    pub beta: f64,
}

impl InverseDiagonalPair {
    pub fn matrix(&self, n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| if i == j { self.alpha } else { self.beta })
    }

    /// `‖(α, β, …, β)‖₁ = |α| + (n−1)|β|`, the ℓ₁ norm of a row of `A⁻¹`.
    pub fn row_l1(&self, n: usize) -> f64 {
        self.alpha.abs() + (n as f64 - 1.0) * self.beta.abs()
    }
}

/// Solves `α + (n−1)ρβ = 1`, `ρα + ((n−2)ρ + 1)β = 0`.
pub fn inverse_diag_offdiag(spec: &EquicorrelatedSpec) -> Result<InverseDiagonalPair> {
    let n = spec.n() as f64;
    let rho = spec.rho();
    // (n−2)ρ + 1 − ρ²(n−1), factored
    let det = (1.0 - rho) * (1.0 + (n - 1.0) * rho);
    if det == 0.0 || !det.is_finite() {
        return Err(Error::domain(format!("A is singular at n = {}, rho = {rho}", spec.n())));
    }
    Ok(InverseDiagonalPair {
        alpha: ((n - 2.0) * rho + 1.0) / det,
        beta: -rho / det,
    })
}

/// `(α, β)` as rational functions of `(n, k)` when `ρ` is the vertex
/// correlation `(nk + k − 1)/(n(k+1) + k − 1)`.
pub fn inverse_at_vertex_correlation(n: usize, k: usize) -> InverseDiagonalPair {
    let (n, k) = (n as f64, k as f64);
    let common = k * n + k + n - 1.0;
    let den = k * n * n * (n + 1.0);
    InverseDiagonalPair {
        alpha: (k * n * n - k + 1.0) * common / den,
        beta: -(k * n + k - 1.0) * common / den,
    }
}

/// Draws `X_i = √ρ·Z₀ + √(1−ρ)·Z_i`; requires `ρ ≥ 0`.
#[derive(Debug, Clone, Copy)]
pub struct EquicorrelatedSampler {
    n: usize,
    loading: f64,
    idiosyncratic: f64,
}

impl EquicorrelatedSampler {
    pub fn new(spec: &EquicorrelatedSpec) -> Result<Self> {
        if spec.rho() < 0.0 {
            return Err(Error::Unsupported(format!(
                "common-factor sampling needs rho >= 0, got {}",
                spec.rho()
            )));
        }
        Ok(Self {
            n: spec.n(),
            loading: spec.rho().sqrt(),
            idiosyncratic: (1.0 - spec.rho()).sqrt(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Fills `out` (length `n`) with one draw.
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.n);
        let common = self.loading * rng.sample::<f64, _>(StandardNormal);
        for x in out.iter_mut() {
            *x = common + self.idiosyncratic * rng.sample::<f64, _>(StandardNormal);
        }
    }
}

/// `count × n` matrix of draws, reproducible per `seed` and independent of
/// the rayon pool size.
pub fn sample_equicorrelated(spec: &EquicorrelatedSpec, count: usize, seed: u64) -> Result<DMatrix<f64>> {
    let sampler = EquicorrelatedSampler::new(spec)?;
    let n = spec.n();
    let data = rng::run_chunked(
        count as u64,
        seed,
        |rng, chunk| {
            let mut rows = vec![0.0; chunk as usize * n];
            for row in rows.chunks_exact_mut(n) {
                sampler.draw(rng, row);
            }
            rows
        },
        Vec::with_capacity(count * n),
        |mut acc, part| {
            acc.extend_from_slice(&part);
            acc
        },
    );
    Ok(DMatrix::from_row_slice(count, n, &data))
}

/// Uniform entrywise bound `ε ≥ 0` on the cross-covariance block `M_ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct CrossBlockBound(f64);

impl CrossBlockBound {
    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon >= 0.0 && epsilon.is_finite() {
            Ok(Self(epsilon))
        } else {
            Err(Error::domain(format!("epsilon must be finite and >= 0, got {epsilon}")))
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.0
    }
}

/// Two readings of the Frobenius total-variation bound.
///
/// `literal` is `(3/2)(m²−m)n²ε²‖row‖₁²`, which bounds the squared
/// Frobenius norm; `corrected` is `(3/2)√(m²−m)·n·ε·‖row‖₁`, a bound on
/// `(3/2)‖Σ_εΣ₀⁻¹ − I‖_F` itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TvBound {
    pub literal: f64,
    pub corrected: f64,
}

pub fn tv_bound_frobenius(
    block_dim: usize,
    blocks: usize,
    entry_bound: CrossBlockBound,
    inv: &InverseDiagonalPair,
) -> Result<TvBound> {
    if block_dim == 0 {
        return Err(Error::domain("block dimension must be >= 1"));
    }
    if blocks < 2 {
        return Err(Error::domain(format!("need at least 2 blocks, got {blocks}")));
    }
    let n = block_dim as f64;
    let m = blocks as f64;
    let off_blocks = m * m - m;
    // every entry of M_ε·B is at most ε·‖(α, β, …, β)‖₁ in magnitude
    let entry = entry_bound.epsilon() * inv.row_l1(block_dim);
    Ok(TvBound {
        literal: 1.5 * off_blocks * n * n * entry * entry,
        corrected: 1.5 * off_blocks.sqrt() * n * entry,
    })
}

/// Assembles the `m·n` square matrix with `diag` on the block diagonal,
/// `off(i, j)` above it and its transpose below.
pub fn block_matrix<F>(blocks: usize, diag: &DMatrix<f64>, mut off: F) -> DMatrix<f64>
where
    F: FnMut(usize, usize) -> DMatrix<f64>,
{
    let n = diag.nrows();
    let mut out = DMatrix::zeros(blocks * n, blocks * n);
    for i in 0..blocks {
        out.view_mut((i * n, i * n), (n, n)).copy_from(diag);
        for j in i + 1..blocks {
            let m = off(i, j);
            out.view_mut((i * n, j * n), (n, n)).copy_from(&m);
            out.view_mut((j * n, i * n), (n, n)).copy_from(&m.transpose());
        }
    }
    out
}

/// Exact `(3/2)‖·‖_F` values for both orderings appearing in the bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactTvNorms {
    /// `(3/2)‖Σ_ε Σ₀⁻¹ − I‖_F`
    pub forward: f64,
    /// `(3/2)‖Σ_ε⁻¹ Σ₀ − I‖_F`, absent when `Σ_ε` is singular
    pub swapped: Option<f64>,
}

pub fn exact_tv_frobenius(sigma_eps: &DMatrix<f64>, sigma_0: &DMatrix<f64>) -> Result<ExactTvNorms> {
    let dim = sigma_0.nrows();
    if sigma_eps.shape() != sigma_0.shape() || sigma_0.ncols() != dim {
        return Err(Error::domain("covariances must be square and of equal shape"));
    }
    let sigma_0_inv = sigma_0
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::domain("Σ₀ is singular"))?;
    let eye = DMatrix::<f64>::identity(dim, dim);
    let forward = 1.5 * (sigma_eps * &sigma_0_inv - &eye).norm();
    let swapped = sigma_eps
        .clone()
        .try_inverse()
        .map(|inv| 1.5 * (inv * sigma_0 - &eye).norm());
    Ok(ExactTvNorms { forward, swapped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn vertex_rho(n: usize, k: usize) -> f64 {
        let (n, k) = (n as f64, k as f64);
        (n * k + k - 1.0) / (n * (k + 1.0) + k - 1.0)
    }

    #[test]
    fn covariance_examples() {
        let a = covariance_matrix(&EquicorrelatedSpec::new(2, 0.5).unwrap());
        assert_eq!(a, DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]));
        let i3 = covariance_matrix(&EquicorrelatedSpec::new(3, 0.0).unwrap());
        assert_eq!(i3, DMatrix::identity(3, 3));
        assert!(matches!(EquicorrelatedSpec::new(3, -0.6), Err(Error::Domain(_))));
        assert!(EquicorrelatedSpec::new(3, -0.5).is_err());
        assert!(EquicorrelatedSpec::new(3, 1.0).is_err());
        assert!(EquicorrelatedSpec::new(0, 0.2).is_err());
        let msg = EquicorrelatedSpec::new(2, 1.2).unwrap_err().to_string();
        assert!(msg.contains("rho outside (-1/(n-1), 1)"), "{msg}");
    }

    #[test]
    fn inverse_examples() {
        let inv = inverse_diag_offdiag(&EquicorrelatedSpec::new(2, 0.5).unwrap()).unwrap();
        assert_relative_eq!(inv.alpha, 4.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(inv.beta, -2.0 / 3.0, epsilon = 1e-14);
        let inv = inverse_diag_offdiag(&EquicorrelatedSpec::new(7, 0.0).unwrap()).unwrap();
        assert_eq!((inv.alpha, inv.beta), (1.0, 0.0));
        let inv = inverse_diag_offdiag(&EquicorrelatedSpec::new(3, 0.5).unwrap()).unwrap();
        assert_relative_eq!(inv.alpha, 1.5, epsilon = 1e-14);
        assert_relative_eq!(inv.beta, -0.5, epsilon = 1e-14);
    }

    #[test]
    fn inverse_solves_both_equations() {
        for n in 2..=60 {
            for &rho in &[-0.9 / (n as f64 - 1.0).max(1.0), 0.0, 0.3, 0.77, 0.99] {
                let spec = EquicorrelatedSpec::new(n, rho).unwrap();
                let inv = inverse_diag_offdiag(&spec).unwrap();
                let nf = n as f64;
                let scale = inv.alpha.abs().max(1.0);
                assert!((inv.alpha + (nf - 1.0) * rho * inv.beta - 1.0).abs() <= 1e-12 * scale);
                assert!((rho * inv.alpha + ((nf - 2.0) * rho + 1.0) * inv.beta).abs() <= 1e-12 * scale);
                let prod = covariance_matrix(&spec) * inv.matrix(n);
                let err = (prod - DMatrix::identity(n, n)).abs().max();
                assert!(err <= 1e-10, "n = {n}, rho = {rho}, err = {err}");
            }
        }
    }

    #[test]
    fn rational_forms_at_vertex_correlation() {
        for k in 2..=8 {
            for n in 2..=200 {
                let spec = EquicorrelatedSpec::new(n, vertex_rho(n, k)).unwrap();
                let direct = inverse_diag_offdiag(&spec).unwrap();
                let rational = inverse_at_vertex_correlation(n, k);
                assert_relative_eq!(direct.alpha, rational.alpha, max_relative = 1e-10);
                assert_relative_eq!(direct.beta, rational.beta, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn displayed_beta_matches_displayed_alpha_does_not() {
        // The quoted rational form for β agrees with the solution of the
        // linear system; the quoted form for α does not (it is not even
        // asymptotic to k+1), so the library ships the re-derived α.
        let (n, k) = (10.0f64, 5.0f64);
        let beta_display =
            (n * n * (k * k + k) + n * (2.0 * k * k - k - 1.0) + (k - 1.0).powi(2)) / (-n.powi(3) * k - n * n * k);
        let alpha_display = (n.powi(3) * (k * k + k) - n * n * (3.0 * k + 1.0) - n * (k * k - 2.0 * k + 3.0) + 2.0 * k
            - 2.0)
            / (n.powi(3) * k - n * n * (k * k + k + 1.0) + 2.0 * n * (k + 1.0) + k * k - 1.0);
        let exact = inverse_at_vertex_correlation(10, 5);
        assert_relative_eq!(beta_display, exact.beta, max_relative = 1e-12);
        assert!((alpha_display - exact.alpha).abs() > 1.0);
    }

    #[test]
    fn lemma_asymptotics() {
        let n = 10_000;
        for k in 2..=8 {
            let spec = EquicorrelatedSpec::new(n, vertex_rho(n, k)).unwrap();
            let inv = inverse_diag_offdiag(&spec).unwrap();
            let target = k as f64 + 1.0;
            assert!((inv.alpha / target - 1.0).abs() < 0.01);
            assert!(((n as f64 - 1.0) * inv.beta.abs() / target - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn eigenvalues_match_generic_solver() {
        for n in [1usize, 2, 3, 7, 20, 50] {
            for &rho in &[0.0, 0.25, 0.9, -0.5 / n.max(2) as f64] {
                let spec = EquicorrelatedSpec::new(n, rho).unwrap();
                let mut ev: Vec<f64> = covariance_matrix(&spec)
                    .symmetric_eigenvalues()
                    .iter()
                    .copied()
                    .collect();
                ev.sort_by(f64::total_cmp);
                let (big, small) = spec.eigenvalues();
                let mut expected = vec![small; n - 1];
                expected.push(big);
                expected.sort_by(f64::total_cmp);
                for (a, b) in ev.iter().zip(&expected) {
                    assert!((a - b).abs() < 1e-10, "n = {n}, rho = {rho}");
                }
            }
        }
    }

    #[test]
    fn sampler_rejects_negative_rho() {
        let spec = EquicorrelatedSpec::new(3, -0.2).unwrap();
        assert!(matches!(
            sample_equicorrelated(&spec, 10, 1),
            Err(Error::Unsupported(_))
        ));
    }

    fn correlation(x: &DMatrix<f64>, i: usize, j: usize) -> f64 {
        let n = x.nrows() as f64;
        let (ci, cj) = (x.column(i), x.column(j));
        let (mi, mj) = (ci.sum() / n, cj.sum() / n);
        let cov = ci.iter().zip(cj.iter()).map(|(a, b)| (a - mi) * (b - mj)).sum::<f64>() / n;
        let vi = ci.iter().map(|a| (a - mi).powi(2)).sum::<f64>() / n;
        let vj = cj.iter().map(|b| (b - mj).powi(2)).sum::<f64>() / n;
        cov / (vi * vj).sqrt()
    }

    #[test]
    fn sampler_examples() {
        let x = sample_equicorrelated(&EquicorrelatedSpec::new(2, 0.0).unwrap(), 1_000_000, 3).unwrap();
        assert!(correlation(&x, 0, 1).abs() < 0.004);

        let x = sample_equicorrelated(&EquicorrelatedSpec::new(5, 0.8).unwrap(), 1_000_000, 4).unwrap();
        for i in 0..5 {
            for j in i + 1..5 {
                assert!((correlation(&x, i, j) - 0.8).abs() < 0.002);
            }
        }

        let x = sample_equicorrelated(&EquicorrelatedSpec::new(3, 0.5).unwrap(), 1_000_000, 5).unwrap();
        let hits = x.row_iter().filter(|r| r.iter().all(|&v| v > 0.0)).count();
        assert!((hits as f64 / 1e6 - 0.25).abs() < 0.0013);
    }

    #[test]
    fn sampler_moments_and_signs() {
        let trials = 1_000_000usize;
        // 10.83 is the 0.999 quantile of chi-square(1); Bonferroni over 8 coordinates
        // still leaves ~1% family-wise false alarm, so use the 0.9999 quantile.
        let chi2_crit = 15.14;
        for (n, rho) in [(2usize, 0.3), (4, 0.6), (8, 0.9)] {
            let x = sample_equicorrelated(&EquicorrelatedSpec::new(n, rho).unwrap(), trials, 99).unwrap();
            let t = trials as f64;
            for i in 0..n {
                let pos = x.column(i).iter().filter(|&&v| v > 0.0).count() as f64;
                let chi2 = 2.0 * (pos - t / 2.0).powi(2) / (t / 2.0);
                assert!(chi2 < chi2_crit, "n = {n}, coordinate {i}: chi2 = {chi2}");
                let var = x.column(i).iter().map(|v| v * v).sum::<f64>() / t;
                assert!((var - 1.0).abs() < 3.0 * (2.0 / t).sqrt());
                for j in i + 1..n {
                    let cov = x.column(i).dot(&x.column(j)) / t;
                    assert!((cov - rho).abs() < 3.0 * ((1.0 + rho * rho) / t).sqrt(), "n = {n}");
                }
            }
        }
    }

    #[test]
    fn sampler_is_reproducible() {
        let spec = EquicorrelatedSpec::new(4, 0.4).unwrap();
        let a = sample_equicorrelated(&spec, 40_000, 17).unwrap();
        let b = sample_equicorrelated(&spec, 40_000, 17).unwrap();
        let c = sample_equicorrelated(&spec, 40_000, 18).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        // a prefix of a longer run is the shorter run
        let long = sample_equicorrelated(&spec, 50_000, 17).unwrap();
        assert_eq!(a, long.rows(0, 40_000).into_owned());
    }

    #[test]
    fn tv_bound_examples() {
        let inv = inverse_at_vertex_correlation(10, 5);
        let zero = tv_bound_frobenius(10, 11, CrossBlockBound::new(0.0).unwrap(), &inv).unwrap();
        assert_eq!((zero.literal, zero.corrected), (0.0, 0.0));

        let eps = 4.5556e-4;
        let one = tv_bound_frobenius(10, 11, CrossBlockBound::new(eps).unwrap(), &inv).unwrap();
        let two = tv_bound_frobenius(10, 11, CrossBlockBound::new(2.0 * eps).unwrap(), &inv).unwrap();
        assert_relative_eq!(two.corrected, 2.0 * one.corrected, max_relative = 1e-14);
        assert_relative_eq!(two.literal, 4.0 * one.literal, max_relative = 1e-14);
        // literal is (2/3)·corrected² by construction
        assert_relative_eq!(one.literal, one.corrected.powi(2) / 1.5, max_relative = 1e-12);

        assert!(tv_bound_frobenius(10, 1, CrossBlockBound::new(eps).unwrap(), &inv).is_err());
        assert!(CrossBlockBound::new(-1e-3).is_err());
    }

    #[test]
    fn corrected_bound_dominates_assembled_norm() {
        // (n, m) = (10, 11) with ε = 4.5556e-4 and (α, β) at ρ_n(10, 5)
        let (n, m, eps) = (10usize, 11usize, 4.5556e-4);
        let spec = EquicorrelatedSpec::new(n, vertex_rho(n, 5)).unwrap();
        let a = covariance_matrix(&spec);
        let inv = inverse_diag_offdiag(&spec).unwrap();
        let bound = tv_bound_frobenius(n, m, CrossBlockBound::new(eps).unwrap(), &inv).unwrap();
        let sigma_0 = block_matrix(m, &a, |_, _| DMatrix::zeros(n, n));

        // constant block, and blocks whose rows align with the sign pattern of
        // one column of B (the extremal choice for that column)
        let constant = DMatrix::from_element(n, n, eps);
        let aligned = DMatrix::from_fn(n, n, |_, l| if l == 0 { eps } else { -eps });
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for block in [constant, aligned] {
            let sigma_eps = block_matrix(m, &a, |_, _| block.clone());
            let exact = exact_tv_frobenius(&sigma_eps, &sigma_0).unwrap();
            assert!(
                exact.forward <= bound.corrected,
                "{} > {}",
                exact.forward,
                bound.corrected
            );
            assert!(exact.forward > 0.0);
        }
        for _ in 0..5 {
            let sigma_eps = block_matrix(m, &a, |_, _| {
                DMatrix::from_fn(n, n, |_, _| if rng.random::<bool>() { eps } else { -eps })
            });
            let exact = exact_tv_frobenius(&sigma_eps, &sigma_0).unwrap();
            assert!(exact.forward <= bound.corrected);
        }
    }

    #[test]
    fn aligned_block_attains_entry_bound_in_its_column() {
        let (n, eps) = (6usize, 1e-3);
        let spec = EquicorrelatedSpec::new(n, 0.7).unwrap();
        let inv = inverse_diag_offdiag(&spec).unwrap();
        let aligned = DMatrix::from_fn(n, n, |_, l| if l == 0 { eps } else { -eps });
        let prod = aligned * inv.matrix(n);
        for i in 0..n {
            assert_relative_eq!(prod[(i, 0)], eps * inv.row_l1(n), max_relative = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn inverse_property(n in 1usize..40, t in 0.001f64..0.999) {
            // map t onto the admissible interval (−1/(n−1), 1)
            let lower = if n == 1 { -0.99 } else { -1.0 / (n as f64 - 1.0) };
            let rho = lower + t * (1.0 - lower);
            let spec = EquicorrelatedSpec::new(n, rho).unwrap();
            let inv = inverse_diag_offdiag(&spec).unwrap();
            let prod = covariance_matrix(&spec) * inv.matrix(n);
            let scale = inv.alpha.abs().max(1.0);
            prop_assert!((prod - DMatrix::identity(n, n)).abs().max() <= 1e-10 * scale);
        }
    }
}
