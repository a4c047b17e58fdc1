use std::time::Instant;

use clap::{Args, ValueEnum};
use orthant_core::orthant::{
    closed_form, density_integral, monte_carlo, orthant_probability, scaled_ratio, steck_quadrature,
};
use orthant_core::simplex::estimate_union_probability;
use orthant_core::{BoundReport, MemoryBudget, OrthantEstimate, QuadratureMethod, QuadratureSpec};

use crate::grid::Grid;
use crate::table::{Cell, PlotSpec, Table};
use crate::{CliError, Context};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Closed form when one exists, otherwise the adaptive integral.
    Best,
    Closed,
    Steck,
    Density,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quadrature {
    Adaptive,
    GaussHermite,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    /// Dimensions: `7`, `2,5,10` or `2:20:2`.
    #[arg(long)]
    pub n: Grid<usize>,
    /// Correlations: `0.5`, `0.2,0.8` or `0.1:0.9:0.1`.
    #[arg(long)]
    pub rho: Grid<f64>,
    #[arg(long, value_enum, default_value_t = Method::Best)]
    pub method: Method,
    /// Integration rule for `steck` and `density`; defaults to gauss-hermite
    /// when `--nodes` is given, adaptive otherwise.
    #[arg(long, value_enum)]
    pub quadrature: Option<Quadrature>,
    /// Starting node count (doubled until converged).
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long, default_value_t = 1e-12)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    /// Required for `--method monte-carlo`.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ComputeArgs {
    fn quadrature(&self) -> Result<QuadratureSpec, CliError> {
        let default = QuadratureSpec::default();
        let method = match self.quadrature {
            Some(Quadrature::GaussHermite) => QuadratureMethod::GaussHermite,
            Some(Quadrature::Adaptive) => QuadratureMethod::TransformedAdaptive,
            None if self.nodes.is_some() => QuadratureMethod::GaussHermite,
            None => default.method,
        };
        Ok(QuadratureSpec::new(
            method,
            self.nodes.unwrap_or(default.nodes),
            self.rel_tol,
        )?)
    }
}

const COMPUTE_COLUMNS: &[&str] = &[
    "n",
    "rho",
    "method",
    "value",
    "std_error",
    "evaluations",
    "achieved_delta",
];

fn timed<T>(ctx: &Context, label: impl FnOnce() -> String, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    if ctx.timing {
        eprintln!("{}: {:.6} s", label(), start.elapsed().as_secs_f64());
    }
    out
}

pub fn compute(args: &ComputeArgs, ctx: &Context) -> Result<(), CliError> {
    let quad = args.quadrature()?;
    if args.method == Method::MonteCarlo && args.seed.is_none() {
        return Err(CliError::Usage("--seed is required for --method monte-carlo".into()));
    }
    let mut table = Table::new(
        "compute",
        COMPUTE_COLUMNS,
        PlotSpec {
            x: "n",
            y: &["value"],
            group: Some("rho"),
        },
    );
    for &n in &args.n.0 {
        for &rho in &args.rho.0 {
            let est = timed(
                ctx,
                || format!("compute n={n} rho={rho:?}"),
                || -> Result<Option<OrthantEstimate>, CliError> {
                    Ok(match args.method {
                        Method::Best => Some(orthant_probability(n, rho)?),
                        Method::Closed => closed_form(n, rho)?,
                        Method::Steck => Some(steck_quadrature(n, rho, &quad)?),
                        Method::Density => Some(density_integral(n, rho, &quad)?),
                        Method::MonteCarlo => Some(monte_carlo(n, rho, args.trials, args.seed.unwrap_or_default())?),
                    })
                },
            )?;
            let row = match est {
                Some(e) => vec![
                    Cell::Int(n as u64),
                    Cell::float(rho),
                    Cell::text(e.method.as_str()),
                    Cell::float(e.get()),
                    Cell::float(e.std_error),
                    Cell::Int(e.evaluations),
                    Cell::float(e.achieved_delta),
                ],
                // no closed form at this point
                None => vec![
                    Cell::Int(n as u64),
                    Cell::float(rho),
                    Cell::text("closed"),
                    Cell::Na,
                    Cell::Na,
                    Cell::Na,
                    Cell::Na,
                ],
            };
            table.push(row);
        }
    }
    table.write(ctx.format, ctx.sink()?)?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n: Grid<usize>,
    #[arg(long)]
    pub rho: Grid<f64>,
}

const BOUNDS_COLUMNS: &[&str] = &[
    "n",
    "rho",
    "f",
    "method",
    "high_rho_lower",
    "high_rho_upper",
    "low_rho_lower",
    "low_rho_upper",
    "low_rho_upper_status",
    "sandwich",
    "scaled_ratio",
    "scaled_ratio_target",
];

pub fn bounds(args: &BoundsArgs, ctx: &Context) -> Result<(), CliError> {
    let mut table = Table::new(
        "bounds",
        BOUNDS_COLUMNS,
        PlotSpec {
            x: "n",
            y: &[
                "f",
                "high_rho_lower",
                "high_rho_upper",
                "low_rho_lower",
                "low_rho_upper",
            ],
            group: Some("rho"),
        },
    );
    for &n in &args.n.0 {
        for &rho in &args.rho.0 {
            let (est, report) = timed(
                ctx,
                || format!("bounds n={n} rho={rho:?}"),
                || -> Result<_, CliError> {
                    let report = BoundReport::evaluate(n, rho)?;
                    Ok((orthant_probability(n, rho)?, report))
                },
            )?;
            let f = est.get();
            let sandwich = match report.sandwich_holds(f) {
                Some(true) => Cell::text("pass"),
                Some(false) => Cell::text("fail"),
                None => Cell::Na,
            };
            let status = match report.low_rho_upper_asymptotic {
                Some(_) => Cell::text("asymptotic"),
                None => Cell::Na,
            };
            let ratio = if rho > 0.0 {
                scaled_ratio(n, rho, est.value).map_or(Cell::Na, Cell::float)
            } else {
                Cell::Na
            };
            table.push(vec![
                Cell::Int(n as u64),
                Cell::float(rho),
                Cell::float(f),
                Cell::text(est.method.as_str()),
                Cell::opt(report.high_rho_lower),
                Cell::opt(report.high_rho_upper),
                Cell::opt(report.low_rho_lower),
                Cell::opt(report.low_rho_upper_asymptotic),
                status,
                sandwich,
                ratio,
                Cell::float(report.scaled_ratio_target),
            ]);
        }
    }
    table.write(ctx.format, ctx.sink()?)?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct SimplexArgs {
    /// Simplex dimensions (the simplex has n + 1 vertices).
    #[arg(long)]
    pub n: Grid<usize>,
    /// Polynomial degree.
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
    /// Memory budget for the polynomial coefficient space, in MiB.
    #[arg(long, default_value_t = MemoryBudget::DEFAULT_BYTES >> 20)]
    pub budget_mib: u64,
}

const SIMPLEX_COLUMNS: &[&str] = &[
    "n",
    "k",
    "trials",
    "seed",
    "rho_n",
    "analytic_f",
    "vertex_probability",
    "vertex_std_error",
    "union_probability",
    "union_std_error",
    "independent_union_approx",
    "tv_bound_literal",
    "tv_bound_corrected",
    "tv_envelope",
];

pub fn simplex(args: &SimplexArgs, ctx: &Context) -> Result<(), CliError> {
    let budget = MemoryBudget::new(args.budget_mib.saturating_mul(1 << 20));
    let mut table = Table::new(
        "simplex",
        SIMPLEX_COLUMNS,
        PlotSpec {
            x: "n",
            y: &[
                "vertex_probability",
                "analytic_f",
                "union_probability",
                "independent_union_approx",
            ],
            group: Some("k"),
        },
    );
    for &n in &args.n.0 {
        let r = timed(
            ctx,
            || format!("simplex n={n} k={}", args.k),
            || estimate_union_probability(n, args.k, args.trials, args.seed, &budget),
        )?;
        table.push(vec![
            Cell::Int(n as u64),
            Cell::Int(args.k as u64),
            Cell::Int(r.trials),
            Cell::Int(r.seed),
            Cell::float(r.rho_n),
            Cell::float(r.analytic_f),
            Cell::float(r.vertex.value),
            Cell::float(r.vertex.std_error),
            Cell::opt(r.union.map(|u| u.value)),
            Cell::opt(r.union.map(|u| u.std_error)),
            Cell::float(r.independent_union_approx),
            Cell::opt(r.tv.map(|t| t.bound.literal)),
            Cell::opt(r.tv.map(|t| t.bound.corrected)),
            Cell::opt(r.tv.map(|t| t.envelope)),
        ]);
    }
    table.write(ctx.format, ctx.sink()?)?;
    Ok(())
}
