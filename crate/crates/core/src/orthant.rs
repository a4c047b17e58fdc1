//! Orthant probabilities `f(n, ρ) = P(X₁ > 0, …, X_n > 0)` for an
//! equicorrelated standard normal vector.
//!
//! Four routes are available: closed forms (`n ≤ 3`, `ρ ∈ {0, ½}`), the
//! one-dimensional identity `f = E[Φⁿ(Z√s)]` with `s = ρ/(1−ρ)`, the
//! equivalent integral `c(s)·∫₀¹ xⁿ φ(Φ⁻¹(x))^{1/s−1} dx`, and Monte Carlo.
//! The module also evaluates the four explicit growth bounds relative to
//! `n^{1−1/ρ}`.

use std::f64::consts::{LN_2, PI};

use serde::Serialize;

use crate::equicorrelated::{EquicorrelatedSampler, EquicorrelatedSpec};
use crate::error::{Error, Result};
use crate::gaussian_kernels::{
    gamma, log_beta, log_gamma, log_std_normal_cdf, log_std_normal_pdf, std_normal_quantile, Probability, LN_SQRT_2PI,
};
use crate::quadrature::{integrate_adaptive, integrate_unit_interval, GaussHermite};
use crate::rng;

/// Largest Gauss–Hermite rule tried while doubling.
const MAX_HERMITE_NODES: usize = 1024;
/// Stop widening the Steck window once the log-integrand has dropped by this much.
const LOG_WINDOW_DROP: f64 = 60.0;
const MAX_PANELS: usize = 20_000;
const MAX_TANH_SINH_LEVEL: u32 = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureMethod {
    /// Gauss–Hermite, recentred at the integrand's mode.
    GaussHermite,
    /// Adaptive Gauss–Kronrod (Steck form) or tanh-sinh (density form).
    TransformedAdaptive,
}

/// Node count and tolerance for the deterministic routes.
///
/// For Gauss–Hermite `nodes` is the first rule tried (then doubled); for the
/// adaptive Steck route it is the initial panel count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub method: QuadratureMethod,
    pub nodes: usize,
    pub rel_tol: f64,
}

impl QuadratureSpec {
    pub fn new(method: QuadratureMethod, nodes: usize, rel_tol: f64) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::domain(format!("nodes must be >= 2, got {nodes}")));
        }
        if !(rel_tol >= 1e-14) || !rel_tol.is_finite() {
            return Err(Error::domain(format!("rel_tol must be >= 1e-14, got {rel_tol}")));
        }
        Ok(Self { method, nodes, rel_tol })
    }

    pub fn gauss_hermite(nodes: usize) -> Result<Self> {
        Self::new(QuadratureMethod::GaussHermite, nodes, 1e-12)
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            method: QuadratureMethod::TransformedAdaptive,
            nodes: 8,
            rel_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrthantMethod {
    ClosedForm,
    SteckGaussHermite,
    SteckAdaptive,
    DensityIntegral,
    MonteCarlo,
}

impl OrthantMethod {
    pub fn is_deterministic(self) -> bool {
        !matches!(self, OrthantMethod::MonteCarlo)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OrthantMethod::ClosedForm => "closed",
            OrthantMethod::SteckGaussHermite => "steck_gauss_hermite",
            OrthantMethod::SteckAdaptive => "steck_adaptive",
            OrthantMethod::DensityIntegral => "density",
            OrthantMethod::MonteCarlo => "monte_carlo",
        }
    }
}

/// A value of `f(n, ρ)` with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrthantEstimate {
    pub value: Probability,
    /// Zero for deterministic methods.
    pub std_error: f64,
    pub method: OrthantMethod,
    /// Integrand evaluations, or trials for Monte Carlo.
    pub evaluations: u64,
    /// Last self-consistency change (deterministic) or zero.
    pub achieved_delta: f64,
}

impl OrthantEstimate {
    fn exact(value: f64) -> Self {
        Self {
            value: Probability::saturating(value),
            std_error: 0.0,
            method: OrthantMethod::ClosedForm,
            evaluations: 0,
            achieved_delta: 0.0,
        }
    }

    pub fn get(&self) -> f64 {
        self.value.get()
    }
}

/// Sheppard: `P(X₁ > 0, X₂ > 0) = 1/4 + arcsin(ρ)/(2π)`.
pub fn sheppard(rho: f64) -> f64 {
    0.25 + rho.asin() / (2.0 * PI)
}

/// `1/8 + (arcsin ρ₁₂ + arcsin ρ₁₃ + arcsin ρ₂₃)/(4π)` for a positive
/// semidefinite trivariate correlation.
pub fn trivariate_closed_form(rho12: f64, rho13: f64, rho23: f64) -> Result<Probability> {
    let rs = [rho12, rho13, rho23];
    if rs.iter().any(|r| !(r.abs() <= 1.0)) {
        return Err(Error::domain("correlations must lie in [-1, 1]"));
    }
    let det = 1.0 + 2.0 * rho12 * rho13 * rho23 - rho12 * rho12 - rho13 * rho13 - rho23 * rho23;
    if det < -1e-14 {
        return Err(Error::domain(format!(
            "correlation matrix is not positive semidefinite (det = {det})"
        )));
    }
    let sum: f64 = rs.iter().map(|r| r.asin()).sum();
    Ok(Probability::saturating(0.125 + sum / (4.0 * PI)))
}

/// Exact value when one is known: `n ≤ 3`, `ρ = 0` or `ρ = ½`.
pub fn closed_form(n: usize, rho: f64) -> Result<Option<OrthantEstimate>> {
    EquicorrelatedSpec::new(n, rho)?;
    let value = if n == 1 {
        0.5
    } else if rho == 0.0 {
        0.5f64.powf(n as f64)
    } else if rho == 0.5 {
        1.0 / (n as f64 + 1.0)
    } else if n == 2 {
        sheppard(rho)
    } else if n == 3 {
        trivariate_closed_form(rho, rho, rho)?.get()
    } else {
        return Ok(None);
    };
    Ok(Some(OrthantEstimate::exact(value)))
}

fn positive_rho(n: usize, rho: f64) -> Result<f64> {
    EquicorrelatedSpec::new(n, rho)?;
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::domain(format!(
            "integral representation needs 0 < rho < 1, got {rho}"
        )));
    }
    Ok(rho / (1.0 - rho))
}

/// `h(z) = log φ(z) + n·log Φ(z√s)`, the log of the Steck integrand.
struct SteckIntegrand {
    n: f64,
    sqrt_s: f64,
}

impl SteckIntegrand {
    fn log_value(&self, z: f64) -> f64 {
        log_std_normal_pdf(z) + self.n * log_std_normal_cdf(z * self.sqrt_s).get()
    }

    /// `(h'(z), h''(z))`.
    fn derivatives(&self, z: f64) -> (f64, f64) {
        let u = z * self.sqrt_s;
        // inverse Mills ratio φ(u)/Φ(u)
        let m = (log_std_normal_pdf(u) - log_std_normal_cdf(u).get()).exp();
        let d1 = -z + self.n * self.sqrt_s * m;
        let d2 = -1.0 - self.n * self.sqrt_s * self.sqrt_s * m * (u + m);
        (d1, d2)
    }

    /// Mode and curvature scale of the (log-concave) integrand.
    fn mode(&self) -> (f64, f64) {
        let mut lo = 0.0;
        let mut hi = 1.0;
        while self.derivatives(hi).0 > 0.0 {
            lo = hi;
            hi *= 2.0;
        }
        let mut z = 0.5 * (lo + hi);
        for _ in 0..200 {
            let (d1, d2) = self.derivatives(z);
            if d1 > 0.0 {
                lo = z;
            } else {
                hi = z;
            }
            let newton = z - d1 / d2;
            let next = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - z).abs() <= 1e-14 * z.abs().max(1.0) {
                z = next;
                break;
            }
            z = next;
        }
        let curvature = -self.derivatives(z).1;
        (z, 1.0 / curvature.sqrt())
    }

    fn window(&self, mode: f64, scale: f64, peak: f64) -> (f64, f64) {
        let edge = |dir: f64| {
            let mut t = 1.0;
            while peak - self.log_value(mode + dir * t * scale) < LOG_WINDOW_DROP {
                t *= 1.5;
            }
            mode + dir * t * scale
        };
        (edge(-1.0), edge(1.0))
    }
}

/// `f(n, ρ) = E[Φⁿ(Z√s)]`, integrand carried as `exp(n·log Φ)`.
pub fn steck_quadrature(n: usize, rho: f64, quad: &QuadratureSpec) -> Result<OrthantEstimate> {
    let s = positive_rho(n, rho)?;
    let integrand = SteckIntegrand {
        n: n as f64,
        sqrt_s: s.sqrt(),
    };
    let (mode, scale) = integrand.mode();
    let peak = integrand.log_value(mode);

    match quad.method {
        QuadratureMethod::TransformedAdaptive => {
            let (lo, hi) = integrand.window(mode, scale, peak);
            let r = integrate_adaptive(
                |z| (integrand.log_value(z) - peak).exp(),
                lo,
                hi,
                quad.nodes,
                quad.rel_tol,
                MAX_PANELS,
            );
            Ok(OrthantEstimate {
                value: Probability::saturating(r.value * peak.exp()),
                std_error: 0.0,
                method: OrthantMethod::SteckAdaptive,
                evaluations: r.evaluations as u64,
                achieved_delta: r.error / r.value.abs(),
            })
        }
        QuadratureMethod::GaussHermite => {
            // ∫ e^{h(z)} dz = σ√(2π)·E[exp(h(μ+σT) + T²/2)], T ~ N(0,1)
            let rule_value = |nodes: usize| -> f64 {
                let gh = GaussHermite::new(nodes);
                let sum: f64 = gh
                    .nodes
                    .iter()
                    .zip(&gh.weights)
                    .filter(|(_, &w)| w > 0.0)
                    .map(|(&t, &w)| (w.ln() + integrand.log_value(mode + scale * t) - peak + 0.5 * t * t).exp())
                    .sum();
                sum * scale * (2.0 * PI).sqrt()
            };
            let mut nodes = quad.nodes;
            let mut value = rule_value(nodes);
            let mut evaluations = nodes as u64;
            let mut delta = f64::INFINITY;
            while nodes * 2 <= MAX_HERMITE_NODES {
                nodes *= 2;
                let next = rule_value(nodes);
                evaluations += nodes as u64;
                delta = (next - value).abs() / next.abs();
                value = next;
                if delta <= quad.rel_tol {
                    break;
                }
            }
            Ok(OrthantEstimate {
                value: Probability::saturating(value * peak.exp()),
                std_error: 0.0,
                method: OrthantMethod::SteckGaussHermite,
                evaluations,
                achieved_delta: delta,
            })
        }
    }
}

/// `f(n, ρ) = (√(2π))^{1/s−1}/√s · ∫₀¹ xⁿ [φ(Φ⁻¹(x))]^{1/s−1} dx`.
///
/// Evaluated by tanh-sinh in `x` with exact complements, so the
/// `(1−x)^{1/s−1}` endpoint singularity for `ρ > ½` is absorbed by the
/// double-exponential clustering rather than split into panels.
pub fn density_integral(n: usize, rho: f64, quad: &QuadratureSpec) -> Result<OrthantEstimate> {
    let s = positive_rho(n, rho)?;
    let exponent = 1.0 / s - 1.0;
    let log_prefactor = exponent * LN_SQRT_2PI - 0.5 * s.ln();
    let nf = n as f64;
    let r = integrate_unit_interval(
        |x, cx| {
            let (q, ln_x) = if x <= 0.5 {
                (std_normal_quantile(x).unwrap_or(f64::NEG_INFINITY), x.ln())
            } else {
                (-std_normal_quantile(cx).unwrap_or(f64::NEG_INFINITY), (-cx).ln_1p())
            };
            (log_prefactor + nf * ln_x + exponent * log_std_normal_pdf(q)).exp()
        },
        quad.rel_tol,
        MAX_TANH_SINH_LEVEL,
    );
    Ok(OrthantEstimate {
        value: Probability::saturating(r.value),
        std_error: 0.0,
        method: OrthantMethod::DensityIntegral,
        evaluations: r.evaluations as u64,
        achieved_delta: r.error / r.value.abs(),
    })
}

/// Fraction of common-factor draws with every coordinate positive.
pub fn monte_carlo(n: usize, rho: f64, trials: u64, seed: u64) -> Result<OrthantEstimate> {
    if trials == 0 {
        return Err(Error::domain("trials must be >= 1"));
    }
    let spec = EquicorrelatedSpec::new(n, rho)?;
    let sampler = EquicorrelatedSampler::new(&spec)?;
    let hits = rng::run_chunked(
        trials,
        seed,
        |rng, count| {
            let mut row = vec![0.0; n];
            let mut hits = 0u64;
            for _ in 0..count {
                sampler.draw(rng, &mut row);
                if row.iter().all(|&x| x > 0.0) {
                    hits += 1;
                }
            }
            hits
        },
        0u64,
        |a, b| a + b,
    );
    let p = hits as f64 / trials as f64;
    Ok(OrthantEstimate {
        value: Probability::saturating(p),
        std_error: (p * (1.0 - p) / trials as f64).sqrt(),
        method: OrthantMethod::MonteCarlo,
        evaluations: trials,
        achieved_delta: 0.0,
    })
}

/// Best deterministic value: a closed form when one exists, otherwise the
/// adaptive Steck quadrature.
pub fn orthant_probability(n: usize, rho: f64) -> Result<OrthantEstimate> {
    if let Some(exact) = closed_form(n, rho)? {
        return Ok(exact);
    }
    if rho < 0.0 {
        return Err(Error::Unsupported(format!(
            "no deterministic method for n = {n} >= 4 with rho = {rho} < 0"
        )));
    }
    steck_quadrature(n, rho, &QuadratureSpec::default())
}

/// `n^{1−1/ρ}` in log form.
fn log_rate(n: usize, rho: f64) -> f64 {
    (1.0 - 1.0 / rho) * (n as f64).ln()
}

fn high_rho_gate(n: usize, rho: f64) -> Result<()> {
    if !(rho > 0.5 && rho < 1.0) || n < 2 {
        return Err(Error::not_applicable(format!(
            "high-correlation bounds need 1/2 < rho < 1 and n >= 2 (n = {n}, rho = {rho})"
        )));
    }
    Ok(())
}

/// Whether `n ≥ (1/ρ − 1)·log n / log 2`.
pub fn low_rho_gate(n: usize, rho: f64) -> bool {
    let nf = n as f64;
    nf >= (1.0 / rho - 1.0) * nf.ln() / LN_2
}

/// Explicit lower bound for `ρ > ½`:
/// `n^{1−1/ρ} · 2/√(2π) / (√(4 + 2b log n) + √(2b log n)) · (1 − 1/(2√(4π log 2)))²`,
/// `b = 1/ρ − 1`.
pub fn bound_high_rho_lower(n: usize, rho: f64) -> Result<f64> {
    high_rho_gate(n, rho)?;
    let two_b_log_n = 2.0 * (1.0 / rho - 1.0) * (n as f64).ln();
    let tail = 2.0 / (2.0 * PI).sqrt() / ((4.0 + two_b_log_n).sqrt() + two_b_log_n.sqrt());
    let power = (1.0 - 1.0 / (2.0 * (4.0 * PI * LN_2).sqrt())).powi(2);
    Ok(log_rate(n, rho).exp() * tail * power)
}

/// Upper bound for `ρ > ½`:
/// `n^{1−1/ρ} · 2^{1/ρ−2} · √((1−ρ)/ρ) · (1 + B(2, 1/ρ − 1))`.
pub fn bound_high_rho_upper(n: usize, rho: f64) -> Result<f64> {
    high_rho_gate(n, rho)?;
    let log_b = log_beta(2.0, 1.0 / rho - 1.0)?;
    // ln(1 + B) without overflow as B → ∞
    let log_one_plus_b = if log_b > 0.0 {
        log_b + (-log_b).exp().ln_1p()
    } else {
        log_b.exp().ln_1p()
    };
    let log_value = log_rate(n, rho) + (1.0 / rho - 2.0) * LN_2 + 0.5 * ((1.0 - rho) / rho).ln() + log_one_plus_b;
    Ok(log_value.exp())
}

/// Lower bound for `ρ < ½` once `n ≥ (1/ρ − 1) log n / log 2`:
/// `n^{1−1/ρ} · 2^{1/ρ−2} · √((1−ρ)/ρ) · (Γ(1/ρ − 1) − 1)`.
///
/// Negative (hence vacuous) when `Γ(1/ρ − 1) < 1`, i.e. for `1/3 < ρ < 1/2`.
pub fn bound_low_rho_lower(n: usize, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 0.5) || n < 2 || !low_rho_gate(n, rho) {
        return Err(Error::not_applicable(format!(
            "low-correlation lower bound needs 0 < rho < 1/2, n >= 2 and n >= (1/rho - 1) log(n)/log(2) (n = {n}, rho = {rho})"
        )));
    }
    let b = 1.0 / rho - 1.0;
    let log_scale = log_rate(n, rho) + (1.0 / rho - 2.0) * LN_2 + 0.5 * ((1.0 - rho) / rho).ln();
    let lg = log_gamma(b)?;
    if lg > 1.0 {
        // Γ(b) − 1 = Γ(b)(1 − 1/Γ(b)) in logs
        Ok((log_scale + lg + (-(-lg).exp()).ln_1p()).exp())
    } else {
        Ok(log_scale.exp() * (gamma(b)? - 1.0))
    }
}

/// Asymptotic upper bound for `ρ < ½`, valid only past an unspecified
/// `n₀(ρ)`: `n^{1−1/ρ} · √((1−ρ)/ρ) · [(1/ρ − 1)(log n)²]^{1/ρ − 2}`.
pub fn bound_low_rho_upper(n: usize, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 0.5) || n < 2 {
        return Err(Error::not_applicable(format!(
            "low-correlation upper bound needs 0 < rho < 1/2 and n >= 2 (n = {n}, rho = {rho})"
        )));
    }
    let b = 1.0 / rho - 1.0;
    let log_n = (n as f64).ln();
    let log_value = log_rate(n, rho) + 0.5 * ((1.0 - rho) / rho).ln() + (1.0 / rho - 2.0) * (b * log_n * log_n).ln();
    Ok(log_value.exp())
}

/// `f / n^{1−1/ρ}`, in logs.
pub fn scaled_ratio(n: usize, rho: f64, f: Probability) -> Result<f64> {
    let f = f.get();
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::domain(format!("scaled ratio needs 0 < f < 1, got {f}")));
    }
    if n == 0 || !(rho > 0.0 && rho < 1.0) {
        return Err(Error::domain(format!(
            "scaled ratio needs n >= 1, 0 < rho < 1 (n = {n}, rho = {rho})"
        )));
    }
    Ok((f.ln() - log_rate(n, rho)).exp())
}

/// All four growth bounds at one `(n, ρ)`; `None` marks a bound outside its
/// regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub rho: f64,
    pub high_rho_lower: Option<f64>,
    pub high_rho_upper: Option<f64>,
    pub low_rho_lower: Option<f64>,
    /// Only meaningful for `n ≥ n₀(ρ)`, which is not explicit.
    pub low_rho_upper_asymptotic: Option<f64>,
    /// `n^{1−1/ρ}`.
    pub scaled_ratio_target: f64,
}

impl BoundReport {
    pub fn evaluate(n: usize, rho: f64) -> Result<Self> {
        EquicorrelatedSpec::new(n, rho)?;
        let keep = |r: Result<f64>| -> Result<Option<f64>> {
            match r {
                Ok(v) => Ok(Some(v)),
                Err(Error::NotApplicable(_)) => Ok(None),
                Err(e) => Err(e),
            }
        };
        let target = if rho > 0.0 && rho < 1.0 {
            log_rate(n, rho).exp()
        } else {
            f64::NAN
        };
        Ok(Self {
            n,
            rho,
            high_rho_lower: keep(bound_high_rho_lower(n, rho))?,
            high_rho_upper: keep(bound_high_rho_upper(n, rho))?,
            low_rho_lower: keep(bound_low_rho_lower(n, rho))?,
            low_rho_upper_asymptotic: keep(bound_low_rho_upper(n, rho))?,
            scaled_ratio_target: target,
        })
    }

    /// Proven lower bound, if any applies.
    pub fn lower(&self) -> Option<f64> {
        self.high_rho_lower.or(self.low_rho_lower)
    }

    /// Proven upper bound, if any applies.
    pub fn upper(&self) -> Option<f64> {
        self.high_rho_upper
    }

    /// `lower ≤ f ≤ upper` over the proven bounds; `None` when none applies.
    pub fn sandwich_holds(&self, f: f64) -> Option<bool> {
        match (self.lower(), self.upper()) {
            (None, None) => None,
            (lo, hi) => Some(lo.into_iter().all(|l| l <= f) && hi.into_iter().all(|u| f <= u)),
        }
    }

    pub fn asymptotic_upper_holds(&self, f: f64) -> Option<bool> {
        self.low_rho_upper_asymptotic.map(|u| f <= u)
    }
}

/// Smallest `n` in the ascending grid from which the asymptotic `ρ < ½`
/// upper bound holds at every later grid point.
pub fn asymptotic_upper_threshold(rho: f64, grid: &[usize]) -> Result<Option<usize>> {
    let mut threshold = None;
    for &n in grid.iter().rev() {
        let f = orthant_probability(n, rho)?.get();
        match bound_low_rho_upper(n, rho) {
            Ok(u) if f <= u => threshold = Some(n),
            Ok(_) => break,
            Err(Error::NotApplicable(_)) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(threshold)
}
