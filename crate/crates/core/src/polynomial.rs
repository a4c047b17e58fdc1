//! Homogeneous polynomials in the monomial basis with the Bombieri inner
//! product, and sampling from the associated Gaussian measure.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng;

/// Upper limit on the bytes a polynomial space may occupy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MemoryBudget {
    pub bytes: u64,
}

impl MemoryBudget {
    pub const DEFAULT_BYTES: u64 = 256 << 20;

    pub fn new(bytes: u64) -> Self {
        Self { bytes }
    }

    /// Rejects `d` coefficients of `bytes_per_coefficient` bytes each.
    pub fn check(&self, dimension: u64, bytes_per_coefficient: u64) -> Result<()> {
        let bytes = dimension.saturating_mul(bytes_per_coefficient);
        if bytes > self.bytes {
            return Err(Error::Resource {
                dimension,
                bytes,
                budget: self.bytes,
            });
        }
        Ok(())
    }
}

impl Default for MemoryBudget {
    fn default() -> Self {
        Self::new(Self::DEFAULT_BYTES)
    }
}

/// `C(n+k−1, k)`, saturating at `u64::MAX`.
pub fn dimension(n: usize, k: usize) -> u64 {
    if n == 0 {
        return u64::from(k == 0);
    }
    let (top, r) = ((n + k - 1) as u128, k.min(n - 1) as u128);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (top - i) / (i + 1);
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// `m!/(α₁!⋯α_n!)` as a product of binomials, exact while it fits in 53 bits.
fn multinomial(alpha: &[u32]) -> f64 {
    let mut remaining: u32 = alpha.iter().sum();
    let mut acc = 1.0;
    for &a in alpha {
        let mut c = 1.0;
        for i in 0..a {
            c = c * f64::from(remaining - i) / f64::from(i + 1);
        }
        acc *= c;
        remaining -= a;
    }
    acc
}

/// All exponent vectors `α ∈ ℕⁿ` with `|α| = k`, in lexicographic order with
/// the first exponent descending: for `n = 2, k = 2` that is
/// `(2,0), (1,1), (0,2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIndexSet {
    n: usize,
    k: usize,
    exponents: Vec<u32>,
}

impl MultiIndexSet {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        Self::with_budget(n, k, &MemoryBudget::default())
    }

    pub fn with_budget(n: usize, k: usize, budget: &MemoryBudget) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("number of variables must be >= 1"));
        }
        let d = dimension(n, k);
        budget.check(d, 8)?;
        budget.check(d, 4 * n as u64)?;
        let mut exponents = Vec::with_capacity(d as usize * n);
        let mut current = vec![0u32; n];
        fill(&mut current, 0, k as u32, &mut exponents);
        debug_assert_eq!(exponents.len(), d as usize * n);
        Ok(Self { n, k, exponents })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.exponents.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn get(&self, i: usize) -> &[u32] {
        &self.exponents[i * self.n..(i + 1) * self.n]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[u32]> {
        self.exponents.chunks_exact(self.n)
    }

    /// `k!/α!` for every index, in order.
    pub fn multinomials(&self) -> Vec<f64> {
        self.iter().map(multinomial).collect()
    }
}

fn fill(current: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<u32>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.extend_from_slice(current);
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        fill(current, pos + 1, remaining - e, out);
    }
    current[pos] = 0;
}

/// Powers `x_j^e` for `e = 0..=k`, row `j`.
fn power_table(x: &[f64], k: usize) -> Vec<f64> {
    let mut table = vec![1.0; x.len() * (k + 1)];
    for (j, &xj) in x.iter().enumerate() {
        let row = &mut table[j * (k + 1)..(j + 1) * (k + 1)];
        for e in 1..=k {
            row[e] = row[e - 1] * xj;
        }
    }
    table
}

/// Gradient of every monomial at `x`: entry `(i, j)` is `∂x^{α_i}/∂x_j`,
/// stored row-major with `n` columns.
pub(crate) fn monomial_gradients(indices: &MultiIndexSet, x: &[f64]) -> Vec<f64> {
    let (n, k) = (indices.n(), indices.k());
    let pow = power_table(x, k);
    let p = |j: usize, e: u32| pow[j * (k + 1) + e as usize];
    let mut out = vec![0.0; indices.len() * n];
    for (i, alpha) in indices.iter().enumerate() {
        for j in 0..n {
            if alpha[j] == 0 {
                continue;
            }
            let mut term = f64::from(alpha[j]) * p(j, alpha[j] - 1);
            for (l, &e) in alpha.iter().enumerate() {
                if l != j {
                    term *= p(l, e);
                }
            }
            out[i * n + j] = term;
        }
    }
    out
}

/// `P(x) = Σ_α a_α x^α`, homogeneous of degree `k` in `n` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct BombieriPolynomial {
    indices: MultiIndexSet,
    coefficients: Vec<f64>,
}

impl BombieriPolynomial {
    pub fn new(indices: MultiIndexSet, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != indices.len() {
            return Err(Error::domain(format!(
                "expected {} coefficients, got {}",
                indices.len(),
                coefficients.len()
            )));
        }
        Ok(Self { indices, coefficients })
    }

    /// `⟨x, c⟩^k`, whose coefficients are `(k!/α!)·c^α`.
    pub fn linear_form_power(c: &[f64], k: usize) -> Result<Self> {
        let indices = MultiIndexSet::new(c.len(), k)?;
        let pow = power_table(c, k);
        let coefficients = indices
            .iter()
            .map(|alpha| {
                let mono: f64 = alpha
                    .iter()
                    .enumerate()
                    .map(|(j, &e)| pow[j * (k + 1) + e as usize])
                    .product();
                multinomial(alpha) * mono
            })
            .collect();
        Self::new(indices, coefficients)
    }

    pub fn n(&self) -> usize {
        self.indices.n()
    }

    pub fn k(&self) -> usize {
        self.indices.k()
    }

    pub fn indices(&self) -> &MultiIndexSet {
        &self.indices
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `(Σ a_α² α!/k!)^{1/2}`.
    pub fn bombieri_norm(&self) -> f64 {
        self.indices
            .iter()
            .zip(&self.coefficients)
            .map(|(alpha, a)| a * a / multinomial(alpha))
            .sum::<f64>()
            .sqrt()
    }

    fn check_dim(&self, x: &[f64], what: &str) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::domain(format!(
                "{what} has dimension {}, polynomial has {} variables",
                x.len(),
                self.n()
            )));
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x, "point")?;
        let k = self.k();
        let pow = power_table(x, k);
        Ok(self
            .indices
            .iter()
            .zip(&self.coefficients)
            .map(|(alpha, a)| {
                a * alpha
                    .iter()
                    .enumerate()
                    .map(|(j, &e)| pow[j * (k + 1) + e as usize])
                    .product::<f64>()
            })
            .sum())
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x, "point")?;
        let n = self.n();
        let grads = monomial_gradients(&self.indices, x);
        let mut g = vec![0.0; n];
        for (row, a) in grads.chunks_exact(n).zip(&self.coefficients) {
            for (gj, r) in g.iter_mut().zip(row) {
                *gj += a * r;
            }
        }
        Ok(g)
    }

    /// `∇P(point)·direction`.
    pub fn directional_derivative(&self, point: &[f64], direction: &[f64]) -> Result<f64> {
        self.check_dim(direction, "direction")?;
        let g = self.gradient(point)?;
        Ok(g.iter().zip(direction).map(|(a, b)| a * b).sum())
    }
}

/// Fills `out` with one draw of standard normals per monomial; the
/// coefficient is `√(k!/α!)` times the draw.
pub(crate) fn draw_standard<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for z in out.iter_mut() {
        *z = rng.sample(StandardNormal);
    }
}

/// One polynomial from the Gaussian measure of the Bombieri inner product:
/// independent `a_α ~ N(0, k!/α!)`.
///
/// Uses the first `d` draws of chunk 0 of `seed`, so it coincides with the
/// first polynomial of any chunked experiment with the same seed.
pub fn sample_polynomial(n: usize, k: usize, seed: u64, budget: &MemoryBudget) -> Result<BombieriPolynomial> {
    if k < 2 {
        return Err(Error::domain(format!("degree k must be >= 2, got {k}")));
    }
    let indices = MultiIndexSet::with_budget(n, k, budget)?;
    let mut z = vec![0.0; indices.len()];
    draw_standard(&mut rng::chunk_rng(seed, 0), &mut z);
    let coefficients = indices
        .multinomials()
        .iter()
        .zip(&z)
        .map(|(w, z)| w.sqrt() * z)
        .collect();
    BombieriPolynomial::new(indices, coefficients)
}
