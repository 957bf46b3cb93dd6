//! Append-only CSV metric files.
//!
//! `metrics.csv` holds one row per training episode:
//! `episode, reward, secrecy_mbps, max_sll, energy_kj, violations,
//! critic_loss, actor_loss, reward_uav0 .. reward_uav{N-1}`.
//! Losses are empty before the first update. `eval.csv` holds one row per
//! evaluation episode with `episode, seed, reward, secrecy_mbps, max_sll,
//! energy_kj, violations`, and `trajectories.csv` the UAV positions as
//! `episode, t, uav, x, y, z`.

use std::fs::{File, OpenOptions};
use std::path::{Path, PathBuf};

use swarmsec_marl::eval::EvalEpisode;
use swarmsec_marl::trainer::EpisodeLog;

use crate::error::{HarnessError, Result};

pub const METRICS_FILE: &str = "metrics.csv";
pub const EVAL_FILE: &str = "eval.csv";
pub const TRAJECTORY_FILE: &str = "trajectories.csv";

/// Floats are written in their shortest round-trip form.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// A CSV file that is truncated when opened and then only appended to,
/// flushing after every record.
pub struct AppendLog {
    path: PathBuf,
    writer: csv::Writer<File>,
}

impl AppendLog {
    pub fn create(path: &Path, header: &[String]) -> Result<Self> {
        let file = OpenOptions::new()
            .create(true)
            .write(true)
            .truncate(true)
            .open(path)
            .map_err(|e| HarnessError::io(path, e))?;
        let mut log = Self {
            path: path.to_path_buf(),
            writer: csv::Writer::from_writer(file),
        };
        log.append(header)?;
        Ok(log)
    }

    pub fn append(&mut self, record: &[String]) -> Result<()> {
        let err = |e: csv::Error| HarnessError::Runtime(format!("{}: {e}", self.path.display()));
        self.writer.write_record(record).map_err(err)?;
        self.writer.flush().map_err(|e| HarnessError::io(&self.path, e))
    }
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

pub fn metrics_header(n_agents: usize) -> Vec<String> {
    let mut h = strings(&[
        "episode",
        "reward",
        "secrecy_mbps",
        "max_sll",
        "energy_kj",
        "violations",
        "critic_loss",
        "actor_loss",
    ]);
    h.extend((0..n_agents).map(|m| format!("reward_uav{m}")));
    h
}

pub fn metrics_row(log: &EpisodeLog) -> Vec<String> {
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    let mut r = vec![
        log.episode.to_string(),
        fmt_f64(log.mean_reward()),
        fmt_f64(log.secrecy_mbps),
        fmt_f64(log.max_sll),
        fmt_f64(log.energy_kj),
        log.violations.to_string(),
        opt(log.critic_loss),
        opt(log.actor_loss),
    ];
    r.extend(log.mean_rewards.iter().map(|&x| fmt_f64(x)));
    r
}

pub fn eval_header() -> Vec<String> {
    strings(&["episode", "seed", "reward", "secrecy_mbps", "max_sll", "energy_kj", "violations"])
}

pub fn eval_row(e: &EvalEpisode) -> Vec<String> {
    vec![
        e.log.episode.to_string(),
        e.seed.to_string(),
        fmt_f64(e.log.mean_reward()),
        fmt_f64(e.log.secrecy_mbps),
        fmt_f64(e.log.max_sll),
        fmt_f64(e.log.energy_kj),
        e.log.violations.to_string(),
    ]
}

pub fn trajectory_header() -> Vec<String> {
    strings(&["episode", "t", "uav", "x", "y", "z"])
}

pub fn trajectory_rows(e: &EvalEpisode) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (t, slot) in e.trajectory.iter().flatten().enumerate() {
        for (m, p) in slot.iter().enumerate() {
            rows.push(vec![
                e.log.episode.to_string(),
                t.to_string(),
                m.to_string(),
                fmt_f64(p.x),
                fmt_f64(p.y),
                fmt_f64(p.z),
            ]);
        }
    }
    rows
}

/// Reads a CSV file into its header and string records.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| HarnessError::Runtime(format!("{}: {e}", path.display())))?;
    let header = rdr
        .headers()
        .map_err(|e| HarnessError::Runtime(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    let rows = rdr
        .records()
        .map(|r| r.map(|r| r.iter().map(str::to_string).collect()))
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| HarnessError::Runtime(format!("{}: {e}", path.display())))?;
    Ok((header, rows))
}
