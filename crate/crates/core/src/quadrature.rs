//! One-dimensional quadrature rules used by the orthant integrals.
//!
//! * Gauss–Hermite nodes for expectations under `N(0, 1)`.
//! * Globally adaptive Gauss–Kronrod (7/15) on a finite interval.
//! * Tanh-sinh on `(0, 1)`, with the integrand receiving both `x` and
//!   `1 − x` so that endpoint singularities are evaluated without
//!   cancellation.

use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI};

/// Nodes and weights of the `n`-point Gauss–Hermite rule for the standard
/// normal weight: `E[g(Z)] ≈ Σ w_i g(x_i)` with `Σ w_i = 1`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Roots of the orthonormal Hermite polynomial are bracketed on a grid
    /// finer than their spacing and polished by safeguarded Newton steps.
    /// The three-term recurrence is rescaled as it runs, so the rule stays
    /// finite for large `n` (extreme weights underflow to zero).
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Hermite rule needs at least one node");
        let nf = n as f64;
        let mut roots = Vec::with_capacity(n / 2 + 1);
        let mut log_weights = Vec::with_capacity(n / 2 + 1);
        let mut push = |roots: &mut Vec<f64>, z: f64| {
            let (_, pm1, log_scale) = hermite(n, z);
            // physicists' weight 2/(2n·p_{n−1}²), then divided by √π
            log_weights.push(-nf.ln() - 2.0 * (pm1.abs().ln() + log_scale) - 0.5 * PI.ln());
            roots.push(z);
        };
        if n % 2 == 1 {
            push(&mut roots, 0.0);
        }
        let h = 0.25 * PI / (2.0 * nf + 1.0).sqrt();
        let top = (2.0 * nf + 1.0).sqrt() + 1.0;
        let mut lo = h * 0.5;
        let mut f_lo = hermite(n, lo).0;
        while lo < top && roots.len() < n.div_ceil(2) {
            let hi = lo + h;
            let f_hi = hermite(n, hi).0;
            if f_lo.signum() != f_hi.signum() {
                push(&mut roots, polish(n, lo, hi, f_lo));
            }
            lo = hi;
            f_lo = f_hi;
        }
        assert_eq!(
            roots.len(),
            n.div_ceil(2),
            "Gauss-Hermite root search failed for n = {n}"
        );

        let scale = std::f64::consts::SQRT_2;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (z, lw) in roots.iter().zip(&log_weights).rev() {
            nodes.push(-z * scale);
            weights.push(lw.exp());
        }
        let skip = n % 2;
        for (z, lw) in roots.iter().zip(&log_weights).skip(skip) {
            nodes.push(z * scale);
            weights.push(lw.exp());
        }
        Self { nodes, weights }
    }

    pub fn expect<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * g(x)).sum()
    }
}

/// `(p_n(z), p_{n−1}(z), log_scale)` for the orthonormal Hermite
/// polynomials (weight `e^{−z²}`); the true values are the returned ones
/// times `e^{log_scale}`.
fn hermite(n: usize, z: f64) -> (f64, f64, f64) {
    let (mut p1, mut p2) = (PI.powf(-0.25), 0.0);
    let mut log_scale = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
        if p1.abs() > 1e150 {
            p1 *= 1e-150;
            p2 *= 1e-150;
            log_scale += 150.0 * std::f64::consts::LN_10;
        }
    }
    (p1, p2, log_scale)
}

/// Root of `p_n` inside a sign-change bracket.
fn polish(n: usize, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let nf = n as f64;
    let mut z = 0.5 * (lo + hi);
    for _ in 0..100 {
        let (p, pm1, _) = hermite(n, z);
        if p == 0.0 {
            return z;
        }
        if p.signum() == f_lo.signum() {
            lo = z;
        } else {
            hi = z;
        }
        // p_n' = √(2n)·p_{n−1}
        let newton = z - p / ((2.0 * nf).sqrt() * pm1);
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - z).abs() <= 4.0 * f64::EPSILON * z.abs() {
            return next;
        }
        z = next;
    }
    z
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Outcome of an adaptive rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    /// Estimated absolute error (Kronrod) or last-level change (tanh-sinh).
    pub error: f64,
    pub evaluations: usize,
}

/// Globally adaptive G7/K15 on `[a, b]`, bisecting the panel with the
/// largest error estimate until the total estimate drops below
/// `rel_tol·|I|` or `max_panels` is reached.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
    rel_tol: f64,
    max_panels: usize,
) -> QuadratureResult {
    let initial_panels = initial_panels.max(1);
    let width = (b - a) / initial_panels as f64;
    let mut heap = BinaryHeap::new();
    let (mut total, mut total_err) = (0.0, 0.0);
    for i in 0..initial_panels {
        let lo = a + i as f64 * width;
        let hi = if i + 1 == initial_panels { b } else { lo + width };
        let (value, error) = kronrod15(&f, lo, hi);
        total += value;
        total_err += error;
        heap.push(Panel {
            a: lo,
            b: hi,
            value,
            error,
        });
    }
    let mut evaluations = 15 * initial_panels;
    while total_err > rel_tol * total.abs() && heap.len() < max_panels {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        let (lv, le) = kronrod15(&f, worst.a, mid);
        let (rv, re) = kronrod15(&f, mid, worst.b);
        evaluations += 30;
        total += lv + rv - worst.value;
        total_err += le + re - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: lv,
            error: le,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: rv,
            error: re,
        });
    }
    // re-sum to shed the drift of the running totals
    let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    QuadratureResult {
        value,
        error,
        evaluations,
    }
}

/// Tanh-sinh quadrature of `∫₀¹ g(x, 1−x) dx`.
///
/// Levels halve the step until two successive estimates agree to
/// `rel_tol`; `g` may be singular at either endpoint as long as the
/// singularity is integrable.
pub fn integrate_unit_interval<G: Fn(f64, f64) -> f64>(g: G, rel_tol: f64, max_level: u32) -> QuadratureResult {
    const T_MAX: f64 = 6.5;
    // contribution of abscissa t (and its mirror), without the step factor
    let term = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let weight_core = PI * t.cosh();
        // x = 1/(1+e^{-2u}), 1 − x = 1/(1+e^{2u})
        let e = (-2.0 * u.abs()).exp();
        let near = e / (1.0 + e);
        let far = 1.0 / (1.0 + e);
        let (x, cx) = if u >= 0.0 { (far, near) } else { (near, far) };
        if x <= 0.0 || cx <= 0.0 {
            return 0.0;
        }
        let v = g(x, cx) * weight_core * x * cx;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };

    let mut h = 1.0;
    let mut sum = term(0.0);
    let mut evaluations = 1;
    let mut k = 1;
    while k as f64 * h <= T_MAX {
        let t = k as f64 * h;
        sum += term(t) + term(-t);
        evaluations += 2;
        k += 1;
    }
    let mut estimate = h * sum;
    let mut delta = f64::INFINITY;
    for level in 1..=max_level {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= T_MAX {
            let t = k as f64 * h;
            sum += term(t) + term(-t);
            evaluations += 2;
            k += 2;
        }
        let next = h * sum;
        delta = (next - estimate).abs();
        estimate = next;
        if level >= 3 && delta <= rel_tol * estimate.abs() {
            break;
        }
    }
    QuadratureResult {
        value: estimate,
        error: delta,
        evaluations,
    }
}
