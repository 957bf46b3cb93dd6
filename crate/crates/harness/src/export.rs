//! Plot-ready tables derived from the metric files of a run directory.

use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};
use crate::metrics::{fmt_f64, read_table, AppendLog, METRICS_FILE, TRAJECTORY_FILE};

pub const PLOT_DIR: &str = "plots";
pub const CONVERGENCE_FILE: &str = "convergence.csv";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const OBJECTIVE_FILE: &str = "objective_vs_n_uavs.csv";

/// Trailing arithmetic moving average; the first `window − 1` points
/// average over the samples available so far.
pub fn moving_average(xs: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    (0..xs.len())
        .map(|i| {
            let s = &xs[(i + 1).saturating_sub(w)..=i];
            s.iter().sum::<f64>() / s.len() as f64
        })
        .collect()
}

fn column(header: &[String], name: &str, path: &Path) -> Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| HarnessError::Runtime(format!("{}: missing column `{name}`", path.display())))
}

fn parse(cell: &str, path: &Path) -> Result<f64> {
    cell.parse()
        .map_err(|_| HarnessError::Runtime(format!("{}: bad number `{cell}`", path.display())))
}

/// `(episode, reward, smoothed)` rows from a metric log.
pub fn convergence_table(metrics: &Path, window: usize) -> Result<Vec<(String, f64, f64)>> {
    let (header, rows) = read_table(metrics)?;
    let ep = column(&header, "episode", metrics)?;
    let rw = column(&header, "reward", metrics)?;
    let rewards = rows.iter().map(|r| parse(&r[rw], metrics)).collect::<Result<Vec<_>>>()?;
    let smooth = moving_average(&rewards, window);
    Ok(rows
        .iter()
        .zip(rewards.iter().zip(smooth))
        .map(|(r, (&x, s))| (r[ep].clone(), x, s))
        .collect())
}

fn copy_columns(src: &Path, dst: &Path, columns: &[&str]) -> Result<()> {
    let (header, rows) = read_table(src)?;
    let idx = columns.iter().map(|c| column(&header, c, src)).collect::<Result<Vec<_>>>()?;
    let mut out = AppendLog::create(dst, &columns.iter().map(|c| c.to_string()).collect::<Vec<_>>())?;
    for r in &rows {
        out.append(&idx.iter().map(|&i| r[i].clone()).collect::<Vec<_>>())?;
    }
    Ok(())
}

/// Writes the per-figure tables of run directory `dir` into `dir/plots`:
/// the smoothed convergence curve, the objective against swarm size (sweep
/// runs) and the trajectory traces. Returns the files written.
pub fn export_plotdata(dir: &Path, window: usize) -> Result<Vec<PathBuf>> {
    let plots = dir.join(PLOT_DIR);
    std::fs::create_dir_all(&plots).map_err(|e| HarnessError::io(&plots, e))?;
    let mut written = Vec::new();

    let metrics = dir.join(METRICS_FILE);
    if metrics.exists() {
        let dst = plots.join(CONVERGENCE_FILE);
        let mut out = AppendLog::create(&dst, &["episode".into(), "reward".into(), "smoothed".into()])?;
        for (e, r, s) in convergence_table(&metrics, window)? {
            out.append(&[e, fmt_f64(r), fmt_f64(s)])?;
        }
        written.push(dst);
    }

    let sweep = dir.join(SWEEP_FILE);
    if sweep.exists() {
        let dst = plots.join(OBJECTIVE_FILE);
        copy_columns(&sweep, &dst, &["n_uavs", "reward", "secrecy_mbps", "max_sll", "energy_kj"])?;
        written.push(dst);
    }

    let traj = dir.join(TRAJECTORY_FILE);
    if traj.exists() {
        let dst = plots.join(TRAJECTORY_FILE);
        copy_columns(&traj, &dst, &["episode", "t", "uav", "x", "y", "z"])?;
        written.push(dst);
    }

    if written.is_empty() {
        return Err(HarnessError::Runtime(format!(
            "{}: no metric files to export",
            dir.display()
        )));
    }
    Ok(written)
}
