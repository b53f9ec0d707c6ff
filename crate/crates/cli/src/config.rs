use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use zdlab::deploy::{GaConfig, DEFAULT_EXHAUSTIVE_CAP};
use zdlab::field::RatioMode;
use zdlab::game::PayoffScale;
use zdlab::network::{generate, ingest_trace, parse_trace, Graph, Topology};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    #[serde(rename = "type")]
    pub kind: Topology,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub density: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSpec {
    pub path: PathBuf,
    #[serde(default = "one")]
    pub min_contacts: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KRange {
    pub k_min: usize,
    pub k_max: usize,
    #[serde(default = "one")]
    pub step: usize,
}

impl KRange {
    pub fn values(&self) -> impl Iterator<Item = usize> {
        (self.k_min..=self.k_max).step_by(self.step.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioKind {
    #[default]
    Expected,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatioSpec {
    #[serde(default)]
    pub mode: RatioKind,
    #[serde(default = "default_rounds")]
    pub rounds: u64,
}

fn default_rounds() -> u64 {
    1000
}

impl Default for RatioSpec {
    fn default() -> Self {
        RatioSpec { mode: RatioKind::Expected, rounds: default_rounds() }
    }
}

impl RatioSpec {
    /// Monte Carlo mode, if requested.
    pub fn monte_carlo(&self) -> Option<RatioMode> {
        match self.mode {
            RatioKind::Expected => None,
            RatioKind::MonteCarlo => Some(RatioMode::MonteCarlo { rounds: self.rounds }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    #[default]
    Ga,
    Exhaustive,
}

fn default_repetitions() -> usize {
    30
}

/// A full K-sweep experiment, read from JSON.
///
/// Repetition `i` uses seed `seed + i` for the genetic search and Monte Carlo
/// sampling; mesh topologies are regenerated per repetition with
/// `topology.seed + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub topology: Option<TopologySpec>,
    #[serde(default)]
    pub trace: Option<TraceSpec>,
    pub scale: PayoffScale,
    pub k_range: KRange,
    #[serde(default)]
    pub ga: GaConfig,
    #[serde(default)]
    pub optimizer: Optimizer,
    #[serde(default)]
    pub ratio: RatioSpec,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Fill the `wall_ms` column. Off by default so reruns are byte-identical.
    #[serde(default)]
    pub record_timing: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Check everything that can be checked before running; `node_count` is
    /// the size of the graph the sweep will use.
    pub fn validate(&self, node_count: usize) -> Result<(), CliError> {
        self.scale.validate().map_err(CliError::from)?;
        if !self.scale.is_dilemma_everywhere() {
            return Err(CliError::Config(format!(
                "payoff scale {} gives r <= 1 for some group size",
                self.scale
            )));
        }
        self.ga.validate().map_err(CliError::from)?;
        let k = self.k_range;
        if k.step == 0 {
            return Err(CliError::Config("k_range.step must be at least 1".into()));
        }
        if k.k_min == 0 || k.k_min > k.k_max {
            return Err(CliError::Config(format!("k_range [{}, {}] must satisfy 1 <= k_min <= k_max", k.k_min, k.k_max)));
        }
        if k.k_max >= node_count {
            return Err(CliError::Config(format!("k_max = {} must be below V = {node_count}", k.k_max)));
        }
        if self.repetitions == 0 {
            return Err(CliError::Config("repetitions must be at least 1".into()));
        }
        if self.ratio.mode == RatioKind::MonteCarlo && self.ratio.rounds == 0 {
            return Err(CliError::Config("ratio.rounds must be at least 1".into()));
        }
        Ok(())
    }

    fn network_source(&self) -> Result<NetworkSource<'_>, CliError> {
        match (&self.topology, &self.trace) {
            (Some(t), None) => Ok(NetworkSource::Topology(t)),
            (None, Some(t)) => Ok(NetworkSource::Trace(t)),
            _ => Err(CliError::Config("exactly one of `topology` and `trace` must be given".into())),
        }
    }

    /// Graph for every repetition. Only mesh topologies differ between
    /// repetitions.
    pub fn graphs(&self) -> Result<Vec<Graph>, CliError> {
        match self.network_source()? {
            NetworkSource::Topology(spec) => {
                let reps = if spec.kind == Topology::Mesh { self.repetitions } else { 1 };
                (0..reps)
                    .map(|i| generate(spec.kind, spec.n, spec.seed.wrapping_add(i as u64), spec.density).map_err(CliError::from))
                    .collect()
            }
            NetworkSource::Trace(spec) => Ok(vec![load_trace(&spec.path, spec.min_contacts)?]),
        }
    }

    pub fn network_label(&self) -> String {
        match (&self.topology, &self.trace) {
            (Some(t), _) => t.kind.name().to_string(),
            (_, Some(_)) => "trace".to_string(),
            _ => "unknown".to_string(),
        }
    }

    pub fn exhaustive_cap(&self) -> u128 {
        DEFAULT_EXHAUSTIVE_CAP
    }
}

enum NetworkSource<'a> {
    Topology(&'a TopologySpec),
    Trace(&'a TraceSpec),
}

pub fn load_trace(path: &Path, min_contacts: usize) -> Result<Graph, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let records = parse_trace(std::io::BufReader::new(file))?;
    Ok(ingest_trace(records, min_contacts)?.graph)
}
