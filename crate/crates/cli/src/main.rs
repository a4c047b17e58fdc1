//! `orthant`: tables of equicorrelated orthant probabilities, their bounds,
//! simplex vertex-maximum experiments and a self-verification run.

mod commands;
mod grid;
mod table;
mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::table::Format;

#[derive(Debug, Parser)]
#[command(
    name = "orthant",
    version,
    about = "Orthant probabilities of equicorrelated Gaussians"
)]
struct Cli {
    /// Worker threads for Monte Carlo chunks; never changes any output value.
    #[arg(long, global = true, env = "ORTHANT_THREADS")]
    threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write the table here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Report per-row wall time on stderr.
    #[arg(long, global = true)]
    timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// f(n, rho) over a grid by the chosen method.
    Compute(commands::ComputeArgs),
    /// f(n, rho) next to its four growth bounds.
    Bounds(commands::BoundsArgs),
    /// Vertex-maximum experiments for random polynomials on the simplex.
    Simplex(commands::SimplexArgs),
    /// Run the invariant suites and print a JSON summary.
    Verify(verify::VerifyArgs),
}

#[derive(Debug)]
pub enum CliError {
    Core(orthant_core::Error),
    Usage(String),
    Io(io::Error),
    /// Summary already written; carries the failed suite names.
    Verification(Vec<String>),
}

impl From<orthant_core::Error> for CliError {
    fn from(e: orthant_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(orthant_core::Error::Resource { .. }) => 2,
            CliError::Verification(_) => 3,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Verification(failed) => write!(f, "verification failed: {}", failed.join(", ")),
        }
    }
}

/// Output sink plus the global presentation flags.
pub struct Context {
    pub format: Format,
    pub timing: bool,
    output: Option<PathBuf>,
}

impl Context {
    pub fn sink(&self) -> io::Result<Box<dyn Write>> {
        Ok(match &self.output {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let ctx = Context {
        format: cli.format,
        timing: cli.timing,
        output: cli.output,
    };
    match cli.command {
        Command::Compute(args) => commands::compute(&args, &ctx),
        Command::Bounds(args) => commands::bounds(&args, &ctx),
        Command::Simplex(args) => commands::simplex(&args, &ctx),
        Command::Verify(args) => verify::run(&args, &ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be >= 1".into())),
        Some(threads) => match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(|| run(cli)),
            Err(e) => Err(CliError::Usage(format!("cannot start thread pool: {e}"))),
        },
        None => run(cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("orthant: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
