//! Orthant probabilities of equicorrelated Gaussian vectors, explicit bounds
//! on them, and the Monte Carlo machinery that links them to vertex maxima of
//! random homogeneous polynomials on the zero-centered simplex.
//!
//! The modules mirror the computation:
//!
//! * [`gaussian_kernels`]: normal pdf/cdf/quantile, tail bounds, gamma and beta.
//! * [`equicorrelated`]: the covariance `A`, its closed-form inverse, the
//!   common-factor sampler and the block total-variation bound.
//! * [`orthant`]: `f(n, ρ)` by closed forms, two quadrature routes and Monte
//!   Carlo, together with the four growth-rate bounds.
//! * [`simplex`] and [`polynomial`]: simplex geometry, Bombieri-Gaussian
//!   polynomials and the vertex-maximum experiments.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod equicorrelated;
pub mod error;
pub mod gaussian_kernels;
pub mod orthant;
pub mod polynomial;
pub mod quadrature;
pub mod rng;
pub mod simplex;

pub use equicorrelated::{CrossBlockBound, EquicorrelatedSpec, InverseDiagonalPair, TvBound};
pub use error::{Error, Result};
pub use gaussian_kernels::{LogProbability, Probability};
pub use orthant::{BoundReport, OrthantEstimate, OrthantMethod, QuadratureMethod, QuadratureSpec};
pub use polynomial::{BombieriPolynomial, MemoryBudget, MultiIndexSet};
pub use simplex::{EdgeFrame, ExperimentReport, SimplexGeometry, VertexStatistics};
