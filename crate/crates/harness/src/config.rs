//! TOML experiment configuration.
//!
//! ```toml
//! experiment = "choi-convergence"
//! n_qubits = 2
//! channel = "random-unitary"      # random-full-rank, or a named channel
//! ensemble_in = "pauli"
//! ensemble_out = "pauli"
//! grid = [100, 300, 1000, 3000, 10000, 30000, 100000]
//! trials = 10
//! groups = 10
//! seed = 1
//! output_dir = "out"
//! save_records = false          # records_dir defaults to <output_dir>/records
//! gnuplot = false
//! ```
//!
//! `sign-statistics` uses `max_n` and `samples` instead of the grid;
//! `unitarity` also reads `bootstrap_resamples`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use proc_shadow::{Ensemble, NamedChannel, ShadowError};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const DEFAULT_GRID: [usize; 7] = [100, 300, 1_000, 3_000, 10_000, 30_000, 100_000];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ChoiConvergence,
    OutputStateConvergence,
    CorrelatorConvergence,
    ComposedCorrelator,
    SignStatistics,
    Unitarity,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::ChoiConvergence => "choi-convergence",
            ExperimentKind::OutputStateConvergence => "output-state-convergence",
            ExperimentKind::CorrelatorConvergence => "correlator-convergence",
            ExperimentKind::ComposedCorrelator => "composed-correlator",
            ExperimentKind::SignStatistics => "sign-statistics",
            ExperimentKind::Unitarity => "unitarity",
        }
    }
}

/// Channel source: Haar unitaries, Stinespring channels, or a fixed named one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelSpec {
    RandomUnitary,
    RandomFullRank,
    Named(NamedChannel),
}

impl fmt::Display for ChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelSpec::RandomUnitary => f.write_str("random-unitary"),
            ChannelSpec::RandomFullRank => f.write_str("random-full-rank"),
            ChannelSpec::Named(c) => c.fmt(f),
        }
    }
}

impl FromStr for ChannelSpec {
    type Err = ShadowError;

    fn from_str(s: &str) -> std::result::Result<Self, ShadowError> {
        match s.trim() {
            "random-unitary" => Ok(ChannelSpec::RandomUnitary),
            "random-full-rank" => Ok(ChannelSpec::RandomFullRank),
            other => other.parse().map(ChannelSpec::Named),
        }
    }
}

impl Serialize for ChannelSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ChannelSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn default_channel() -> ChannelSpec {
    ChannelSpec::RandomUnitary
}
fn default_ensemble() -> String {
    "pauli".into()
}
fn default_grid() -> Vec<usize> {
    DEFAULT_GRID.to_vec()
}
fn default_trials() -> usize {
    10
}
fn default_groups() -> usize {
    10
}
fn default_n() -> usize {
    2
}
fn default_max_n() -> usize {
    10
}
fn default_samples() -> usize {
    100_000
}
fn default_resamples() -> usize {
    2000
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_n")]
    pub n_qubits: usize,
    #[serde(default = "default_channel")]
    pub channel: ChannelSpec,
    #[serde(default = "default_ensemble")]
    pub ensemble_in: String,
    #[serde(default = "default_ensemble")]
    pub ensemble_out: String,
    #[serde(default = "default_grid")]
    pub grid: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Median-of-means group count.
    #[serde(default = "default_groups")]
    pub groups: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub save_records: bool,
    /// Where record files go; `<output_dir>/records` when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub records_dir: Option<PathBuf>,
    #[serde(default)]
    pub gnuplot: bool,
    #[serde(default = "default_max_n")]
    pub max_n: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_resamples")]
    pub bootstrap_resamples: usize,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            n_qubits: default_n(),
            channel: default_channel(),
            ensemble_in: default_ensemble(),
            ensemble_out: default_ensemble(),
            grid: default_grid(),
            trials: default_trials(),
            groups: default_groups(),
            seed: 0,
            output_dir: default_output(),
            save_records: false,
            records_dir: None,
            gnuplot: false,
            max_n: default_max_n(),
            samples: default_samples(),
            bootstrap_resamples: default_resamples(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is serializable")
    }

    pub fn ensembles(&self) -> Result<(Ensemble, Ensemble)> {
        let parse = |s: &str| {
            s.parse::<Ensemble>()
                .map_err(|e| HarnessError::Config(e.to_string()))
        };
        Ok((parse(&self.ensemble_in)?, parse(&self.ensemble_out)?))
    }

    pub fn max_m(&self) -> usize {
        self.grid.iter().copied().max().unwrap_or(0)
    }

    /// Checks everything that does not require building channels.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(HarnessError::Config(m));
        self.ensembles()?;
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.groups == 0 {
            return fail("groups must be at least 1".into());
        }
        if self.n_qubits == 0 {
            return fail("n_qubits must be at least 1".into());
        }
        if self.experiment == ExperimentKind::SignStatistics {
            if self.max_n == 0 || self.samples == 0 {
                return fail("sign-statistics needs max_n >= 1 and samples >= 1".into());
            }
            return Ok(());
        }
        if self.grid.is_empty() {
            return fail("grid must not be empty".into());
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return fail("grid must be strictly ascending".into());
        }
        if self.grid[0] < self.groups {
            return fail(format!(
                "smallest grid point {} is below the group count {}",
                self.grid[0], self.groups
            ));
        }
        Ok(())
    }
}
