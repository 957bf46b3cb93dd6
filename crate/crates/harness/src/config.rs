//! Run configuration: TOML file, dotted-path overrides, validation and hash.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use swarmsec_core::env::{RewardWeights, ScenarioConfig};
use swarmsec_core::Exec;
use swarmsec_marl::trainer::{Algorithm, TrainerConfig};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Train,
    Eval,
    Sweep,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Train => "train",
            Mode::Eval => "eval",
            Mode::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExecutionConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub algorithm: Algorithm,
    pub mode: Mode,
    /// Deterministic evaluation episodes after training or in `eval` mode.
    pub eval_episodes: usize,
    /// Parameter file read in `eval` mode.
    pub checkpoint: Option<PathBuf>,
    /// Swarm sizes visited in `sweep` mode.
    pub sweep_n_uavs: Vec<usize>,
    /// Moving-average window of the exported convergence curve.
    pub smoothing_window: usize,
    pub exec: Exec,
}

impl Default for ExecutionConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out_dir: PathBuf::from("runs/default"),
            algorithm: Algorithm::Hmca,
            mode: Mode::Train,
            eval_episodes: 10,
            checkpoint: None,
            sweep_n_uavs: vec![4, 6, 8],
            smoothing_window: 20,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub reward: RewardWeights,
    pub trainer: TrainerConfig,
    pub run: ExecutionConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.reward.validate()?;
        self.trainer.validate()?;
        let r = &self.run;
        let bad = |name: &str, why: &str| Err(HarnessError::Config(format!("invalid `{name}`: {why}")));
        if r.seed > i64::MAX as u64 {
            return bad("run.seed", "must fit a signed 64-bit integer");
        }
        if r.out_dir.as_os_str().is_empty() {
            return bad("run.out_dir", "must not be empty");
        }
        if r.eval_episodes == 0 {
            return bad("run.eval_episodes", "must be >= 1");
        }
        if r.smoothing_window == 0 {
            return bad("run.smoothing_window", "must be >= 1");
        }
        let attention = r.algorithm == Algorithm::Hmca;
        if attention && self.scenario.n_uavs < 2 {
            return bad("scenario.n_uavs", "the attention critic needs at least two UAVs");
        }
        if r.mode == Mode::Sweep {
            if r.sweep_n_uavs.is_empty() {
                return bad("run.sweep_n_uavs", "must list at least one swarm size");
            }
            if r.sweep_n_uavs.iter().any(|&n| n < 1 || (attention && n < 2)) {
                return bad("run.sweep_n_uavs", "swarm sizes must be >= 1 (>= 2 for hmca)");
            }
        }
        if r.mode == Mode::Eval && r.algorithm != Algorithm::Random && r.checkpoint.is_none() {
            return bad("run.checkpoint", "eval of a learned policy needs a parameter file");
        }
        Ok(())
    }

    /// Canonical TOML text of the full configuration.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HarnessError::Config(format!("cannot serialize config: {e}")))
    }

    /// SHA-256 of [`RunConfig::to_toml`].
    pub fn hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_toml()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}

/// Parses TOML text, applies `key=value` overrides, fills defaults and
/// validates.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let cfg: RunConfig = Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path, overrides: &[String]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, overrides).map_err(|e| match e {
        HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Sets `a.b.c = value` in `table`. The value is read as a TOML literal and
/// falls back to a bare string.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| HarnessError::Config(format!("override `{assignment}` is not key=value")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(HarnessError::Config(format!("override key `{key}` is malformed")));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut cur = table;
    for p in parents {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| HarnessError::Config(format!("override `{key}`: `{p}` is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}
