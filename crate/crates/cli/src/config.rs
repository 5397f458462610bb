//! Flag parsing and the flag > config-file > benchmark-default layering.

use std::collections::HashMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::run::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "vamoma",
    version,
    about = "Radially symmetric Monge-Ampere solver via the vanishing moment method"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one perturbed problem and write solution/report artifacts
    Solve(CommonArgs),
    /// Sweep the perturbation parameter (or the mesh) and fit rates
    Sweep(SweepArgs),
    /// Solve the concave branch (even dimensions only)
    Concave(CommonArgs),
    /// Sample the exact unperturbed solution for either branch
    Exact(ExactArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Built-in benchmark name (paper-sec7 | constant-f | zero-f)
    #[arg(long)]
    pub benchmark: Option<String>,
    /// CSV file with "r,f" samples defining the source by interpolation
    #[arg(long, value_name = "FILE")]
    pub f_samples: Option<PathBuf>,
    /// Spatial dimension (n >= 2)
    #[arg(long)]
    pub n: Option<u32>,
    /// Domain radius R
    #[arg(long)]
    pub radius: Option<f64>,
    /// Boundary value g(R)
    #[arg(long = "gR")]
    pub boundary_value: Option<f64>,
    /// Perturbation parameter (comma-separated list where a sweep applies)
    #[arg(long)]
    pub eps: Option<String>,
    /// Element count (comma-separated list where a sweep applies)
    #[arg(long)]
    pub elements: Option<String>,
    /// Iteration tolerance on the update sup norm
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// picard | newton | picard-then-newton
    #[arg(long)]
    pub scheme: Option<String>,
    /// Step fraction in (0, 1]
    #[arg(long)]
    pub damping: Option<f64>,
    /// Gauss points per element
    #[arg(long)]
    pub quad: Option<usize>,
    /// Warm-start down a ladder of decades in eps
    #[arg(long)]
    pub continuation: bool,
    /// Sample count for solution output (default 10 per element)
    #[arg(long)]
    pub samples: Option<usize>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv | json table format
    #[arg(long)]
    pub format: Option<String>,
    /// Flat key=value config file (flags take precedence)
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Stream per-iteration solver records to stderr
    #[arg(long)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Fit spatial order at fixed eps against a fine reference solve
    #[arg(long)]
    pub h_sweep: bool,
    /// Reference element count for the h-sweep mode
    #[arg(long)]
    pub reference_elements: Option<usize>,
    /// Concurrent solves (default: VAMOMA_JOBS or the available cores)
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// convex | concave
    #[arg(long)]
    pub branch: Option<String>,
}

/// Values read from a `key=value` config file; empty when no file is given.
#[derive(Debug, Default)]
pub struct FileConfig(HashMap<String, String>);

impl FileConfig {
    pub fn load(path: Option<&PathBuf>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut map = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "config line {} is not key=value: '{line}'",
                    lineno + 1
                )));
            };
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                CliError::Config(format!("config value '{raw}' for '{key}' does not parse"))
            }),
        }
    }
}

/// Parse a comma-separated list of floats.
pub fn parse_list_f64(raw: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("'{tok}' is not a number")))
        })
        .collect()
}

/// Parse a comma-separated list of element counts.
pub fn parse_list_usize(raw: &str) -> Result<Vec<usize>, CliError> {
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Config(format!("'{tok}' is not an integer")))
        })
        .collect()
}
