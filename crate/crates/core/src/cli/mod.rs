//! Command-line front end: `rates`, `simulate`, `demo` and `fib`.
//!
//! Exit codes: 0 on success, 2 for invalid configuration (including argument
//! errors reported by clap), 3 for I/O failures.

mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{demo_trace, fib_table, rates_table, simulate, SimulationReport};
pub use config::{parse_grid, ExperimentConfig, OutputFormat};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "partition-mac",
    version,
    about = "Partition reservation over the Boolean OR channel"
)]
pub struct Cli {
    /// Worker threads for Monte Carlo trials (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// CSV of C(p) and C_g(p) over a grid, with a maxima trailer row.
    Rates {
        #[arg(long, default_value = "0.001:0.999:0.001")]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo error estimates, one report per (N, scheme).
    Simulate {
        /// JSON file with the same fields as the flags.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        params: ExperimentConfig,
    },
    /// Step-by-step replay of a four-user, three-slot example.
    Demo {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV of F(k,p), J_k(p), φ(p), ψ(p) with a cross-check column.
    Fib {
        #[arg(long, default_value_t = 20)]
        k_max: usize,
        #[arg(long, default_value = "0.1:1:0.1")]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_output(
    path: Option<&PathBuf>,
    stdout: &mut dyn Write,
    body: &[u8],
) -> Result<(), CliError> {
    match path {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(body)
            .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}"))),
    }
}

pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let pool = {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(threads) = cli.threads {
            if threads == 0 {
                return Err(CliError::Config("--threads must be at least 1".into()));
            }
            builder = builder.num_threads(threads);
        }
        builder
            .build()
            .map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))?
    };
    let (out, body) = pool.install(|| -> Result<_, CliError> {
        Ok(match cli.command {
            Command::Rates { grid, out } => (out, rates_table(&parse_grid(&grid)?)?),
            Command::Simulate { config, params } => {
                let base = match config {
                    Some(path) => ExperimentConfig::from_file(&path)?,
                    None => ExperimentConfig::default(),
                };
                let cfg = params.layered_over(base);
                let reports = simulate(&cfg)?;
                let body = commands::render_reports(&reports, cfg.format.unwrap_or_default())?;
                (cfg.out, body)
            }
            Command::Demo { out } => (out, demo_trace()?.into_bytes()),
            Command::Fib { k_max, grid, out } => (out, fib_table(k_max, &parse_grid(&grid)?)?),
        })
    })?;
    write_output(out.as_ref(), stdout, &body)
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match execute(cli, &mut std::io::stdout().lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("partition-mac: {e}");
            e.exit_code()
        }
    }
}
