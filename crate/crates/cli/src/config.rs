use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use riesz_teig::problems::ProblemName;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "RIESZ_TEIG_OUTPUT_DIR";

/// Output directory used when neither the config nor the environment sets one.
pub const DEFAULT_OUTPUT_DIR: &str = "riesz-teig-out";

/// A single value or a list, so configs may write `"n": 10` or `"n": [5, 10]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// How the truncation index is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Selector {
    /// Oracle index minimizing the grid-L2 error against the true solution.
    Best,
    Discrepancy,
    Lcurve,
    #[default]
    All,
}

impl Selector {
    pub fn best(self) -> bool {
        matches!(self, Selector::Best | Selector::All)
    }

    pub fn discrepancy(self) -> bool {
        matches!(self, Selector::Discrepancy | Selector::All)
    }

    pub fn lcurve(self) -> bool {
        matches!(self, Selector::Lcurve | Selector::All)
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Selector::Best => "best",
            Selector::Discrepancy => "discrepancy",
            Selector::Lcurve => "lcurve",
            Selector::All => "all",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Self { csv: true, json: true }
    }
}

impl FromStr for Formats {
    type Err = CliError;

    /// Comma-separated list of `csv` and `json`.
    fn from_str(s: &str) -> CliResult<Self> {
        let mut out = Formats { csv: false, json: false };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "csv" => out.csv = true,
                "json" => out.json = true,
                other => return Err(CliError::user(format!("unknown output format '{other}'"))),
            }
        }
        if !(out.csv || out.json) {
            return Err(CliError::user("at least one output format is required"));
        }
        Ok(out)
    }
}

/// The problem and its optional parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub name: String,
    /// FDEM truncation depth; ignored for the artificial problems.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Option<f64>,
}

fn default_grid_points() -> usize {
    1000
}

fn default_timing() -> bool {
    true
}

/// Everything needed to rerun an experiment; one JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub n: OneOrMany<usize>,
    #[serde(default = "zero_delta")]
    pub delta: OneOrMany<f64>,
    #[serde(default = "zero_seed")]
    pub seed: OneOrMany<u64>,
    /// Discrepancy safety factor; defaults to 1.3 for FDEM and 1.1 otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default)]
    pub selector: Selector,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub formats: Formats,
    /// Write per-phase runtimes next to each summary. Runtimes are the only
    /// nondeterministic output, so they live in their own file.
    #[serde(default = "default_timing")]
    pub timing: bool,
}

fn zero_delta() -> OneOrMany<f64> {
    OneOrMany::One(0.0)
}

fn zero_seed() -> OneOrMany<u64> {
    OneOrMany::One(0)
}

impl ExperimentConfig {
    pub fn new(problem: impl Into<String>, n: usize) -> Self {
        Self {
            problem: ProblemConfig {
                name: problem.into(),
                z0: None,
            },
            n: OneOrMany::One(n),
            delta: zero_delta(),
            seed: zero_seed(),
            tau: None,
            selector: Selector::All,
            grid_points: default_grid_points(),
            output_dir: None,
            formats: Formats::default(),
            timing: true,
        }
    }

    pub fn from_json_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::user(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::user(format!("invalid config {}: {e}", path.display())))
    }

    pub fn problem_name(&self) -> CliResult<ProblemName> {
        Ok(self.problem.name.parse()?)
    }

    pub fn tau(&self) -> CliResult<f64> {
        Ok(self.tau.unwrap_or(self.problem_name()?.default_tau()))
    }

    /// The configured directory, else the environment variable, else the default.
    pub fn resolved_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }

    pub fn validate(&self) -> CliResult<()> {
        let name = self.problem_name()?;
        if self.grid_points < 2 {
            return Err(CliError::user(format!("grid_points must be at least 2, got {}", self.grid_points)));
        }
        let ns = self.n.to_vec();
        if ns.is_empty() || ns.iter().any(|&n| n < 2) {
            return Err(CliError::user("n must list at least one size, each at least 2"));
        }
        let deltas = self.delta.to_vec();
        if deltas.is_empty() || deltas.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(CliError::user("delta must list non-negative finite noise levels"));
        }
        if self.seed.to_vec().is_empty() {
            return Err(CliError::user("seed list is empty"));
        }
        if let Some(tau) = self.tau {
            if !(tau > 1.0 && tau.is_finite()) {
                return Err(CliError::user(format!("tau must exceed 1, got {tau}")));
            }
        }
        if let Some(z0) = self.problem.z0 {
            if !name.is_fdem() {
                return Err(CliError::user("z0 applies only to fdem problems"));
            }
            if !(z0 > 0.0 && z0.is_finite()) {
                return Err(CliError::user(format!("z0 must be positive, got {z0}")));
            }
        }
        if !(self.formats.csv || self.formats.json) {
            return Err(CliError::user("at least one output format is required"));
        }
        Ok(())
    }
}
