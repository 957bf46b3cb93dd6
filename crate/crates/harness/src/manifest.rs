//! Run manifest: identity, provenance and output inventory of a run.

use std::path::Path;

use serde::{Deserialize, Serialize};
use swarmsec_marl::eval::EvalSummary;

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.toml";

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Running,
    Completed,
    Failed,
}

/// Secrecy and energy against swarm size, as reported by a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTrend {
    pub n_uavs: Vec<usize>,
    pub secrecy_mbps: Vec<f64>,
    pub energy_kj: Vec<f64>,
    pub secrecy_non_decreasing: bool,
    /// Energy of the largest swarm over that of the smallest.
    pub energy_ratio: f64,
}

impl SweepTrend {
    pub fn new(n_uavs: Vec<usize>, secrecy_mbps: Vec<f64>, energy_kj: Vec<f64>) -> Self {
        let secrecy_non_decreasing = secrecy_mbps.windows(2).all(|w| w[1] >= w[0]);
        let energy_ratio = match (energy_kj.first(), energy_kj.last()) {
            (Some(a), Some(b)) => b / a,
            _ => f64::NAN,
        };
        Self {
            n_uavs,
            secrecy_mbps,
            energy_kj,
            secrecy_non_decreasing,
            energy_ratio,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub run_id: String,
    pub status: Status,
    pub mode: String,
    pub algorithm: String,
    pub seed: u64,
    pub config_hash: String,
    pub code_version: String,
    pub started: String,
    pub finished: Option<String>,
    /// Files written by the run, relative to its output directory.
    pub outputs: Vec<String>,
    /// Child run directories (sweeps), relative to the output directory.
    pub children: Vec<String>,
    pub evaluation: Option<EvalSummary>,
    /// Final policy parameter hash of learned algorithms.
    pub policy_hash: Option<String>,
    pub trend: Option<SweepTrend>,
    pub error: Option<String>,
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

impl Manifest {
    pub fn start(cfg: &RunConfig) -> Result<Self> {
        let hash = cfg.hash()?;
        Ok(Self {
            run_id: format!("{}-{}-{}", cfg.run.mode.name(), cfg.run.algorithm.name(), &hash[..12]),
            status: Status::Running,
            mode: cfg.run.mode.name().into(),
            algorithm: cfg.run.algorithm.name().into(),
            seed: cfg.run.seed,
            config_hash: hash,
            code_version: CODE_VERSION.into(),
            started: now(),
            finished: None,
            outputs: Vec::new(),
            children: Vec::new(),
            evaluation: None,
            policy_hash: None,
            trend: None,
            error: None,
        })
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| HarnessError::Runtime(format!("cannot serialize manifest: {e}")))?;
        std::fs::write(&path, text + "\n").map_err(|e| HarnessError::io(&path, e))
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Runtime(format!("{}: {e}", path.display())))
    }
}
