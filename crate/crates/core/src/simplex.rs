//! The zero-centered simplex, edge derivatives of random polynomials at its
//! vertices, and the Monte Carlo experiments built on them.
//!
//! Vertices `a_i = e_i − z` live in the hyperplane `S = {Σxᵢ = 0}` of
//! `R^{n+1}`. A fixed Helmert basis identifies `S` with `Rⁿ`, where the
//! polynomials are defined; an extra orthogonal map can be composed for
//! rotation checks.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::equicorrelated::{inverse_diag_offdiag, tv_bound_frobenius, CrossBlockBound, EquicorrelatedSpec, TvBound};
use crate::error::{Error, Result};
use crate::gaussian_kernels::Probability;
use crate::orthant::orthant_probability;
use crate::polynomial::{
    dimension, draw_standard, monomial_gradients, BombieriPolynomial, MemoryBudget, MultiIndexSet,
};
use crate::rng;

/// Trials pushed through one matrix product.
const BATCH: usize = 256;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Regular simplex with `n + 1` vertices centred at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexGeometry {
    n: usize,
    /// `n × (n+1)`, orthonormal rows spanning `S`.
    embedding: DMatrix<f64>,
    /// Embedded vertices, one per column (`n × (n+1)`).
    embedded: DMatrix<f64>,
}

impl SimplexGeometry {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("simplex dimension n must be >= 1"));
        }
        // Helmert rows (1, …, 1, −j, 0, …)/√(j(j+1))
        let mut embedding = DMatrix::zeros(n, n + 1);
        for j in 1..=n {
            let norm = ((j * (j + 1)) as f64).sqrt();
            for c in 0..j {
                embedding[(j - 1, c)] = 1.0 / norm;
            }
            embedding[(j - 1, j)] = -(j as f64) / norm;
        }
        let vertices = DMatrix::from_fn(n + 1, n + 1, |r, c| {
            f64::from(u8::from(r == c)) - 1.0 / (n as f64 + 1.0)
        });
        let embedded = &embedding * vertices;
        Ok(Self { n, embedding, embedded })
    }

    /// Same simplex with the embedding followed by the orthogonal map `q`.
    pub fn rotated(&self, q: &DMatrix<f64>) -> Result<Self> {
        if q.shape() != (self.n, self.n) {
            return Err(Error::domain(format!("rotation must be {0} × {0}", self.n)));
        }
        let defect = (q.transpose() * q - DMatrix::<f64>::identity(self.n, self.n)).amax();
        if defect > 1e-10 {
            return Err(Error::domain(format!("map is not orthogonal (defect {defect:e})")));
        }
        Ok(Self {
            n: self.n,
            embedding: q * &self.embedding,
            embedded: q * &self.embedded,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertex_count(&self) -> usize {
        self.n + 1
    }

    /// `a_i = e_i − z` in `R^{n+1}`.
    pub fn vertex(&self, i: usize) -> Result<Vec<f64>> {
        self.check_vertex(i)?;
        let z = 1.0 / (self.n as f64 + 1.0);
        Ok((0..=self.n).map(|c| if c == i { 1.0 - z } else { -z }).collect())
    }

    /// `a_i` in the coordinates of `Rⁿ`.
    pub fn embedded_vertex(&self, i: usize) -> Result<Vec<f64>> {
        self.check_vertex(i)?;
        Ok(self.embedded.column(i).iter().copied().collect())
    }

    /// Maps a point of `S ⊂ R^{n+1}` to `Rⁿ`.
    pub fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n + 1 {
            return Err(Error::domain(format!("expected a vector of length {}", self.n + 1)));
        }
        Ok((&self.embedding * DVector::from_column_slice(x))
            .iter()
            .copied()
            .collect())
    }

    pub fn embedding(&self) -> &DMatrix<f64> {
        &self.embedding
    }

    fn check_vertex(&self, i: usize) -> Result<()> {
        if i > self.n {
            return Err(Error::domain(format!("vertex index {i} out of range 0..={}", self.n)));
        }
        Ok(())
    }

    /// Unit directions `v = (a − a_j)/‖a − a_j‖` at vertex `a = a_i`, for
    /// `j ≠ i` in increasing order.
    pub fn edge_frame(&self, vertex: usize) -> Result<EdgeFrame> {
        self.check_vertex(vertex)?;
        let a = self.embedded.column(vertex);
        let directions = (0..=self.n)
            .filter(|&j| j != vertex)
            .map(|j| {
                let d = a - self.embedded.column(j);
                (&d / d.norm()).iter().copied().collect()
            })
            .collect();
        Ok(EdgeFrame {
            vertex,
            point: a.iter().copied().collect(),
            directions,
        })
    }
}

/// Outward unit edge directions at one vertex, in embedded coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFrame {
    pub vertex: usize,
    pub point: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
}

/// `k⟨v,w⟩⟨a,b⟩^{k−1} + (k²−k)⟨v,b⟩⟨a,w⟩⟨a,b⟩^{k−2}`: the Bombieri inner
/// product of the functionals `P ↦ ∂P/∂v(a)` and `P ↦ ∂P/∂w(b)`.
pub fn derivative_inner_product(v: &[f64], a: &[f64], w: &[f64], b: &[f64], k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::domain(format!("degree k must be >= 2, got {k}")));
    }
    let len = v.len();
    if a.len() != len || w.len() != len || b.len() != len {
        return Err(Error::domain("vectors must have a common dimension"));
    }
    let kf = k as f64;
    let ab = dot(a, b);
    Ok(kf * dot(v, w) * ab.powi(k as i32 - 1) + (kf * kf - kf) * dot(v, b) * dot(a, w) * ab.powi(k as i32 - 2))
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("n must be >= 1"));
    }
    if k < 2 {
        return Err(Error::domain(format!("degree k must be >= 2, got {k}")));
    }
    Ok(())
}

/// `(nk + k − 1)/(n(k+1) + k − 1)`, the correlation between two
/// normalized edge derivatives at the same vertex.
pub fn rho_n(n: usize, k: usize) -> Result<f64> {
    check_nk(n, k)?;
    let (n, k) = (n as f64, k as f64);
    Ok((n * k + k - 1.0) / (n * (k + 1.0) + k - 1.0))
}

/// `(1/n^{k−2})·(1/(2k−1))·(1/n + k − 1)`, the stated uniform bound on
/// correlations between derivatives at distinct vertices.
///
/// It is exceeded by the exact correlations (see [`cross_vertex_bound`]).
pub fn epsilon_n(n: usize, k: usize) -> Result<f64> {
    check_nk(n, k)?;
    let (nf, kf) = (n as f64, k as f64);
    Ok(nf.powi(2 - k as i32) / (2.0 * kf - 1.0) * (1.0 / nf + kf - 1.0))
}

/// `‖a‖²(1/n^{k−1} + (k−1)/n^{k−2}) / (‖a‖² + (k−1)/2)` with
/// `‖a‖² = n/(n+1)`: the cross-vertex bound obtained from
/// `|⟨a,b⟩| = 1/(n+1)`, `|⟨v,b⟩|, |⟨a,w⟩| ≤ 1/√2` and the derivative norm,
/// without further simplification.
pub fn cross_vertex_bound(n: usize, k: usize) -> Result<f64> {
    check_nk(n, k)?;
    let (nf, kf) = (n as f64, k as f64);
    let numer = nf.powi(1 - k as i32) + (kf - 1.0) * nf.powi(2 - k as i32);
    Ok(2.0 * nf * numer / (2.0 * nf + (kf - 1.0) * (nf + 1.0)))
}

/// Analytic quantities of the edge-derivative family at `(n, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VertexStatistics {
    pub n: usize,
    pub k: usize,
    pub rho_n: f64,
    pub epsilon_n: f64,
    pub cross_vertex_bound: f64,
    /// `‖∂/∂v(a)‖ = (k‖a‖^{2k−4}(‖a‖² + (k−1)/2))^{1/2}`.
    pub derivative_norm: f64,
}

impl VertexStatistics {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        let norm_sq = n as f64 / (n as f64 + 1.0);
        let kf = k as f64;
        let derivative_norm = (kf * norm_sq.powi(k as i32 - 2) * (norm_sq + (kf - 1.0) / 2.0)).sqrt();
        Ok(Self {
            n,
            k,
            rho_n: rho_n(n, k)?,
            epsilon_n: epsilon_n(n, k)?,
            cross_vertex_bound: cross_vertex_bound(n, k)?,
            derivative_norm,
        })
    }
}

/// Exact correlation matrix of all normalized edge derivatives, rows
/// ordered `(vertex, direction)`.
pub fn edge_derivative_correlations(geom: &SimplexGeometry, k: usize) -> Result<DMatrix<f64>> {
    let frames = (0..geom.vertex_count())
        .map(|v| geom.edge_frame(v))
        .collect::<Result<Vec<_>>>()?;
    let items: Vec<(&[f64], &[f64])> = frames
        .iter()
        .flat_map(|f| f.directions.iter().map(move |d| (d.as_slice(), f.point.as_slice())))
        .collect();
    let m = items.len();
    let mut cov = DMatrix::zeros(m, m);
    for r in 0..m {
        for s in r..m {
            let (v, a) = items[r];
            let (w, b) = items[s];
            let c = derivative_inner_product(v, a, w, b, k)?;
            cov[(r, s)] = c;
            cov[(s, r)] = c;
        }
    }
    let sd: Vec<f64> = (0..m).map(|i| cov[(i, i)].sqrt()).collect();
    Ok(DMatrix::from_fn(m, m, |r, s| cov[(r, s)] / (sd[r] * sd[s])))
}

/// Largest `|corr|` between derivatives at distinct vertices.
pub fn max_cross_vertex_correlation(geom: &SimplexGeometry, k: usize) -> Result<f64> {
    let corr = edge_derivative_correlations(geom, k)?;
    let n = geom.n();
    let mut max: f64 = 0.0;
    for r in 0..corr.nrows() {
        for s in 0..corr.ncols() {
            if r / n != s / n {
                max = max.max(corr[(r, s)].abs());
            }
        }
    }
    Ok(max)
}

/// Whether every edge derivative of `p` at the vertex is strictly positive.
pub fn is_vertex_max(p: &BombieriPolynomial, geom: &SimplexGeometry, vertex: usize) -> Result<bool> {
    if p.n() != geom.n() {
        return Err(Error::domain(format!(
            "polynomial has {} variables, simplex is embedded in R^{}",
            p.n(),
            geom.n()
        )));
    }
    let frame = geom.edge_frame(vertex)?;
    let grad = p.gradient(&frame.point)?;
    Ok(frame.directions.iter().all(|v| dot(&grad, v) > 0.0))
}

/// Linear map from standardized coefficients `z` (with `a_α = √(k!/α!)·z_α`)
/// to the edge derivatives at the first `vertices` vertices.
#[derive(Debug, Clone)]
pub struct DerivativeOperator {
    vertices: usize,
    matrix: DMatrix<f64>,
}

impl DerivativeOperator {
    pub fn new(geom: &SimplexGeometry, k: usize, vertices: usize, budget: &MemoryBudget) -> Result<Self> {
        check_nk(geom.n(), k)?;
        if vertices == 0 || vertices > geom.vertex_count() {
            return Err(Error::domain(format!(
                "vertex count must lie in 1..={}",
                geom.vertex_count()
            )));
        }
        let n = geom.n();
        let rows = vertices * n;
        budget.check(dimension(n, k), 8 * rows as u64)?;
        let indices = MultiIndexSet::with_budget(n, k, budget)?;
        let scale: Vec<f64> = indices.multinomials().iter().map(|w| w.sqrt()).collect();
        let d = indices.len();
        let mut matrix = DMatrix::zeros(rows, d);
        for vtx in 0..vertices {
            let frame = geom.edge_frame(vtx)?;
            let grads = monomial_gradients(&indices, &frame.point);
            for (i, dir) in frame.directions.iter().enumerate() {
                let r = vtx * n + i;
                for c in 0..d {
                    matrix[(r, c)] = scale[c] * dot(&grads[c * n..(c + 1) * n], dir);
                }
            }
        }
        Ok(Self { vertices, matrix })
    }

    /// Number of vertex blocks, each of `n` rows.
    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dimension(&self) -> usize {
        self.matrix.ncols()
    }

    /// Derivatives for a batch of standardized coefficient columns.
    pub fn apply(&self, z: &DMatrix<f64>) -> DMatrix<f64> {
        &self.matrix * z
    }

    /// Runs `visit` on derivative batches (`rows × b`) for `trials`
    /// polynomials; trial `t` of chunk `c` uses the next `d` normals of
    /// stream `(seed, c)`.
    fn simulate<T, V, M>(&self, trials: u64, seed: u64, init: T, visit: V, merge: M) -> T
    where
        T: Send + Clone + Sync,
        V: Fn(&mut T, &DMatrix<f64>) + Sync,
        M: Fn(T, T) -> T,
    {
        let d = self.dimension();
        let rows = self.rows();
        rng::run_chunked(
            trials,
            seed,
            |rng, count| {
                let mut acc = init.clone();
                let mut remaining = count as usize;
                let mut z = DMatrix::zeros(d, BATCH);
                let mut x = DMatrix::zeros(rows, BATCH);
                while remaining > 0 {
                    let b = remaining.min(BATCH);
                    if b < BATCH {
                        z = DMatrix::zeros(d, b);
                        x = DMatrix::zeros(rows, b);
                    }
                    draw_standard(rng, z.as_mut_slice());
                    x.gemm(1.0, &self.matrix, &z, 0.0);
                    visit(&mut acc, &x);
                    remaining -= b;
                }
                acc
            },
            init.clone(),
            merge,
        )
    }
}

/// Hit count with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Frequency {
    pub hits: u64,
    pub trials: u64,
    pub value: f64,
    pub std_error: f64,
}

impl Frequency {
    fn new(hits: u64, trials: u64) -> Self {
        let p = hits as f64 / trials as f64;
        Self {
            hits,
            trials,
            value: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }
}

/// Evaluation of the total-variation bound at the vertex correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TvPipeline {
    pub n: usize,
    pub k: usize,
    pub rho_n: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub beta: f64,
    pub bound: TvBound,
    /// `(k+1)²/n^{2k−8}`, for trend comparison only.
    pub envelope: f64,
}

/// TV bound between the joint law of all `(n+1)·n` normalized derivatives and
/// its block-independent counterpart, with `ε = epsilon_n(n, k)`.
pub fn tv_pipeline(n: usize, k: usize) -> Result<TvPipeline> {
    tv_pipeline_with_epsilon(n, k, epsilon_n(n, k)?)
}

pub fn tv_pipeline_with_epsilon(n: usize, k: usize, epsilon: f64) -> Result<TvPipeline> {
    if n < 2 {
        return Err(Error::domain(format!("n must be >= 2, got {n}")));
    }
    let rho = rho_n(n, k)?;
    let inv = inverse_diag_offdiag(&EquicorrelatedSpec::new(n, rho)?)?;
    let bound = tv_bound_frobenius(n, n + 1, CrossBlockBound::new(epsilon)?, &inv)?;
    let kf = k as f64;
    Ok(TvPipeline {
        n,
        k,
        rho_n: rho,
        epsilon,
        alpha: inv.alpha,
        beta: inv.beta,
        bound,
        envelope: (kf + 1.0).powi(2) * (n as f64).powi(8 - 2 * k as i32),
    })
}

/// `1 − (1 − f)^{n+1}`, the union probability for `n + 1` independent
/// vertices.
pub fn independent_union_approx(n: usize, f: Probability) -> Probability {
    let f = f.get();
    if f >= 1.0 {
        return Probability::ONE;
    }
    Probability::saturating(-((n as f64 + 1.0) * (-f).ln_1p()).exp_m1())
}

/// `c · n^{−n/(nk+k−1)} / √(log n) · (n+1)`.
pub fn beta_n_sequence(n: usize, k: usize, c: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!("n must be >= 2, got {n}")));
    }
    check_nk(n, k)?;
    if !(c > 0.0) {
        return Err(Error::domain(format!("c must be > 0, got {c}")));
    }
    let (nf, kf) = (n as f64, k as f64);
    let exponent = -nf / (nf * kf + kf - 1.0);
    Ok(c * nf.powf(exponent) / nf.ln().sqrt() * (nf + 1.0))
}

/// Outcome of a vertex-maximum experiment with its analytic comparators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub n: usize,
    pub k: usize,
    pub trials: u64,
    pub seed: u64,
    pub rho_n: f64,
    /// `f(n, ρ_n)`.
    pub analytic_f: f64,
    /// Maximum at vertex 0.
    pub vertex: Frequency,
    /// Maximum at some vertex; absent for single-vertex runs.
    pub union: Option<Frequency>,
    pub independent_union_approx: f64,
    /// Absent for `n = 1`.
    pub tv: Option<TvPipeline>,
}

fn report(
    n: usize,
    k: usize,
    trials: u64,
    seed: u64,
    vertex: Frequency,
    union: Option<Frequency>,
) -> Result<ExperimentReport> {
    let rho = rho_n(n, k)?;
    let f = orthant_probability(n, rho)?.value;
    Ok(ExperimentReport {
        n,
        k,
        trials,
        seed,
        rho_n: rho,
        analytic_f: f.get(),
        vertex,
        union,
        independent_union_approx: independent_union_approx(n, f).get(),
        tv: if n >= 2 { Some(tv_pipeline(n, k)?) } else { None },
    })
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::domain("trials must be >= 1"));
    }
    Ok(())
}

/// Frequency of a maximum at vertex 0 over `trials` sampled polynomials.
pub fn estimate_vertex_probability_in(
    geom: &SimplexGeometry,
    k: usize,
    trials: u64,
    seed: u64,
    budget: &MemoryBudget,
) -> Result<ExperimentReport> {
    check_trials(trials)?;
    let op = DerivativeOperator::new(geom, k, 1, budget)?;
    let hits = op.simulate(
        trials,
        seed,
        0u64,
        |acc, x| *acc += x.column_iter().filter(|c| c.iter().all(|&v| v > 0.0)).count() as u64,
        |a, b| a + b,
    );
    report(geom.n(), k, trials, seed, Frequency::new(hits, trials), None)
}

pub fn estimate_vertex_probability(
    n: usize,
    k: usize,
    trials: u64,
    seed: u64,
    budget: &MemoryBudget,
) -> Result<ExperimentReport> {
    estimate_vertex_probability_in(&SimplexGeometry::new(n)?, k, trials, seed, budget)
}

/// Frequency of a maximum at some vertex, with the vertex-0 frequency from
/// the same draws.
pub fn estimate_union_probability(
    n: usize,
    k: usize,
    trials: u64,
    seed: u64,
    budget: &MemoryBudget,
) -> Result<ExperimentReport> {
    check_trials(trials)?;
    let geom = SimplexGeometry::new(n)?;
    let op = DerivativeOperator::new(&geom, k, geom.vertex_count(), budget)?;
    let (vertex_hits, union_hits) = op.simulate(
        trials,
        seed,
        (0u64, 0u64),
        |acc, x| {
            for col in x.column_iter() {
                let mut any = false;
                for v in 0..=n {
                    if col.rows(v * n, n).iter().all(|&d| d > 0.0) {
                        if v == 0 {
                            acc.0 += 1;
                        }
                        any = true;
                    }
                }
                acc.1 += u64::from(any);
            }
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    );
    report(
        n,
        k,
        trials,
        seed,
        Frequency::new(vertex_hits, trials),
        Some(Frequency::new(union_hits, trials)),
    )
}

/// Sample moments of all `(n+1)·n` unnormalized edge derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientStatistics {
    pub n: usize,
    pub k: usize,
    pub trials: u64,
    sum: DVector<f64>,
    cross: DMatrix<f64>,
}

impl GradientStatistics {
    pub fn covariance(&self) -> DMatrix<f64> {
        let t = self.trials as f64;
        (&self.cross - &self.sum * self.sum.transpose() / t) / (t - 1.0)
    }

    pub fn correlation(&self) -> DMatrix<f64> {
        let cov = self.covariance();
        let m = cov.nrows();
        DMatrix::from_fn(m, m, |r, s| cov[(r, s)] / (cov[(r, r)] * cov[(s, s)]).sqrt())
    }

    /// Large-sample standard error `(1 − r²)/√N` of a sample correlation.
    pub fn correlation_std_error(&self, r: f64) -> f64 {
        (1.0 - r * r) / (self.trials as f64).sqrt()
    }

    /// Standard error of a sample variance of normals, `σ²√(2/(N−1))`.
    pub fn variance_std_error(&self, variance: f64) -> f64 {
        variance * (2.0 / (self.trials as f64 - 1.0)).sqrt()
    }

    /// Pairs `(r, s, corr)` at distinct vertices with `|corr| > ε + 3σ`.
    pub fn cross_vertex_excess(&self, epsilon: f64) -> Vec<(usize, usize, f64)> {
        let corr = self.correlation();
        let n = self.n;
        let mut out = Vec::new();
        for r in 0..corr.nrows() {
            for s in r + 1..corr.ncols() {
                let c = corr[(r, s)];
                if r / n != s / n && c.abs() > epsilon + 3.0 * self.correlation_std_error(c) {
                    out.push((r, s, c));
                }
            }
        }
        out
    }
}

pub fn gradient_statistics_in(
    geom: &SimplexGeometry,
    k: usize,
    trials: u64,
    seed: u64,
    budget: &MemoryBudget,
) -> Result<GradientStatistics> {
    if trials < 2 {
        return Err(Error::domain("need at least 2 trials for sample moments"));
    }
    let op = DerivativeOperator::new(geom, k, geom.vertex_count(), budget)?;
    let m = op.rows();
    let (sum, cross) = op.simulate(
        trials,
        seed,
        (DVector::zeros(m), DMatrix::zeros(m, m)),
        |acc, x| {
            for col in x.column_iter() {
                acc.0 += col;
            }
            acc.1.gemm(1.0, x, &x.transpose(), 1.0);
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    );
    Ok(GradientStatistics {
        n: geom.n(),
        k,
        trials,
        sum,
        cross,
    })
}

pub fn gradient_statistics(
    n: usize,
    k: usize,
    trials: u64,
    seed: u64,
    budget: &MemoryBudget,
) -> Result<GradientStatistics> {
    gradient_statistics_in(&SimplexGeometry::new(n)?, k, trials, seed, budget)
}

/// Haar-distributed orthogonal `n × n` matrix from the QR factorization of a
/// Gaussian matrix, columns sign-normalized by `R`'s diagonal.
pub fn random_orthogonal(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rng::chunk_rng(seed, 0);
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}
