//! Grid syntax and the simulation config shared by flags and JSON files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::random_coding::DecoderKind;

/// Parses `a:b:step` (inclusive of `b` up to rounding) or a comma list.
/// The empty string is the empty grid.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let number = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Config(format!("bad number {s:?} in grid {text:?}")))
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (number(a)?, number(b)?, number(step)?);
            if step.is_nan() || step <= 0.0 || !a.is_finite() || !b.is_finite() {
                return Err(CliError::Config(format!(
                    "grid {text:?} needs finite ends and a positive step"
                )));
            }
            if b < a {
                return Ok(Vec::new());
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| a + i as f64 * step).collect())
        }
        [_] => text.split(',').map(number).collect(),
        _ => Err(CliError::Config(format!(
            "grid {text:?} must be a:b:step or a comma-separated list"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Simulation parameters. Every field is optional so that a JSON file and
/// command-line flags can be layered; flags win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Decoders to run: map, bipartite-k2, brute-force.
    #[arg(long = "scheme", value_delimiter = ',')]
    #[serde(default)]
    pub schemes: Vec<DecoderKind>,
    /// Numbers of users, one report per value.
    #[arg(long = "n", value_delimiter = ',')]
    #[serde(default)]
    pub n: Vec<usize>,
    /// Number of active users.
    #[arg(long)]
    pub k: Option<usize>,
    /// Bernoulli parameter of the random access matrix.
    #[arg(long)]
    pub p: Option<f64>,
    /// Fixed number of slots.
    #[arg(long)]
    pub slots: Option<usize>,
    /// Rate margin: T = ceil(log2 N / (C(p) - xi)).
    #[arg(long)]
    pub xi: Option<f64>,
    /// Codebook size for the brute-force scheme (T = K * L).
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Master seed; required.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Draw the active set uniformly per trial.
    #[arg(long)]
    #[serde(default)]
    pub random_actives: bool,
    /// Reuse one codebook for all trials.
    #[arg(long)]
    #[serde(default)]
    pub fixed_codebook: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
    }

    /// `self` overrides `base` field by field.
    pub fn layered_over(self, base: ExperimentConfig) -> ExperimentConfig {
        fn pick<T>(over: Vec<T>, base: Vec<T>) -> Vec<T> {
            if over.is_empty() {
                base
            } else {
                over
            }
        }
        ExperimentConfig {
            schemes: pick(self.schemes, base.schemes),
            n: pick(self.n, base.n),
            k: self.k.or(base.k),
            p: self.p.or(base.p),
            slots: self.slots.or(base.slots),
            xi: self.xi.or(base.xi),
            l: self.l.or(base.l),
            trials: self.trials.or(base.trials),
            seed: self.seed.or(base.seed),
            random_actives: self.random_actives || base.random_actives,
            fixed_codebook: self.fixed_codebook || base.fixed_codebook,
            out: self.out.or(base.out),
            format: self.format.or(base.format),
        }
    }
}
