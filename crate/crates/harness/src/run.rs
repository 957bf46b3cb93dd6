//! Campaign execution: train, eval and sweep modes.

use std::path::{Path, PathBuf};

use swarmsec_core::seed::{derive, rng_from};
use swarmsec_marl::eval::{evaluate, Controller, EvalEpisode, EvalSummary};
use swarmsec_marl::trainer::{train, Team};

use crate::config::{Mode, RunConfig};
use crate::error::{HarnessError, Result};
use crate::export::{export_plotdata, SWEEP_FILE};
use crate::manifest::{now, Manifest, Status, SweepTrend, CONFIG_FILE};
use crate::metrics::{
    eval_header, eval_row, fmt_f64, metrics_header, metrics_row, trajectory_header, trajectory_rows, AppendLog,
    EVAL_FILE, METRICS_FILE, TRAJECTORY_FILE,
};

pub const CHECKPOINT_FILE: &str = "checkpoint.bin";

const TAG_EVAL: u64 = 0x4556414c;

/// Environment seeds of the `k` evaluation episodes of a run.
pub fn eval_seeds(seed: u64, k: usize) -> Vec<u64> {
    let base = derive(seed, TAG_EVAL);
    (0..k as u64).map(|i| derive(base, i)).collect()
}

/// Executes `cfg` and returns its final manifest. On failure the manifest in
/// the output directory is marked failed before the error is returned.
pub fn run(cfg: &RunConfig) -> Result<Manifest> {
    cfg.validate()?;
    let dir = cfg.run.out_dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
    let config_path = dir.join(CONFIG_FILE);
    std::fs::write(&config_path, cfg.to_toml()?).map_err(|e| HarnessError::io(&config_path, e))?;

    let mut manifest = Manifest::start(cfg)?;
    manifest.outputs.push(CONFIG_FILE.into());
    manifest.write(&dir)?;
    let outcome = match cfg.run.mode {
        Mode::Train => run_train(cfg, &dir, &mut manifest),
        Mode::Eval => run_eval(cfg, &dir, &mut manifest),
        Mode::Sweep => run_sweep(cfg, &dir, &mut manifest),
    }
    .and_then(|()| {
        for p in export_plotdata(&dir, cfg.run.smoothing_window)? {
            manifest.outputs.push(relative(&dir, &p));
        }
        Ok(())
    });
    manifest.finished = Some(now());
    match outcome {
        Ok(()) => {
            manifest.status = Status::Completed;
            manifest.write(&dir)?;
            Ok(manifest)
        }
        Err(e) => {
            manifest.status = Status::Failed;
            manifest.error = Some(e.to_string());
            manifest.write(&dir)?;
            Err(e)
        }
    }
}

fn relative(dir: &Path, p: &Path) -> String {
    p.strip_prefix(dir).unwrap_or(p).display().to_string()
}

fn run_train(cfg: &RunConfig, dir: &Path, manifest: &mut Manifest) -> Result<()> {
    let metrics_path = dir.join(METRICS_FILE);
    let mut log = AppendLog::create(&metrics_path, &metrics_header(cfg.scenario.n_uavs))?;
    manifest.outputs.push(METRICS_FILE.into());
    let outcome = train(
        &cfg.scenario,
        &cfg.reward,
        &cfg.trainer,
        cfg.run.algorithm,
        cfg.run.seed,
        |l| {
            log.append(&metrics_row(l))
                .map_err(|e| swarmsec_marl::MarlError::Io(std::io::Error::other(e.to_string())))
        },
    )?;
    let controller = match &outcome.team {
        Some(team) => {
            team.save(&dir.join(CHECKPOINT_FILE))?;
            manifest.outputs.push(CHECKPOINT_FILE.into());
            manifest.policy_hash = Some(team.policy_hash());
            Controller::Team(team)
        }
        None => Controller::Random,
    };
    manifest.evaluation = Some(write_evaluation(cfg, dir, controller, manifest)?);
    Ok(())
}

fn load_team(cfg: &RunConfig, path: &Path) -> Result<Team> {
    let kind = cfg
        .run
        .algorithm
        .critic_kind()
        .ok_or_else(|| HarnessError::Config("the random policy has no parameters".into()))?;
    let mut team = Team::new(
        cfg.scenario.n_uavs,
        cfg.scenario.observation_len(),
        &cfg.trainer,
        kind,
        &mut rng_from(0),
    )?;
    team.load(path)?;
    Ok(team)
}

fn run_eval(cfg: &RunConfig, dir: &Path, manifest: &mut Manifest) -> Result<()> {
    let team = match &cfg.run.checkpoint {
        Some(p) if cfg.run.algorithm.critic_kind().is_some() => Some(load_team(cfg, p)?),
        _ => None,
    };
    if let Some(t) = &team {
        manifest.policy_hash = Some(t.policy_hash());
    }
    let controller = team.as_ref().map_or(Controller::Random, Controller::Team);
    manifest.evaluation = Some(write_evaluation(cfg, dir, controller, manifest)?);
    Ok(())
}

fn write_evaluation(
    cfg: &RunConfig,
    dir: &Path,
    controller: Controller<'_>,
    manifest: &mut Manifest,
) -> Result<EvalSummary> {
    let seeds = eval_seeds(cfg.run.seed, cfg.run.eval_episodes);
    let (episodes, summary) = evaluate(&cfg.scenario, &cfg.reward, controller, &seeds, true, cfg.run.exec)?;
    write_episodes(dir, &episodes)?;
    manifest.outputs.push(EVAL_FILE.into());
    manifest.outputs.push(TRAJECTORY_FILE.into());
    Ok(summary)
}

fn write_episodes(dir: &Path, episodes: &[EvalEpisode]) -> Result<()> {
    let mut eval = AppendLog::create(&dir.join(EVAL_FILE), &eval_header())?;
    let mut traj = AppendLog::create(&dir.join(TRAJECTORY_FILE), &trajectory_header())?;
    for e in episodes {
        eval.append(&eval_row(e))?;
        for r in trajectory_rows(e) {
            traj.append(&r)?;
        }
    }
    Ok(())
}

/// Child configuration of a sweep for swarm size `n`.
pub fn sweep_child(cfg: &RunConfig, n: usize) -> RunConfig {
    let mut child = cfg.clone();
    child.scenario.n_uavs = n;
    child.run.mode = Mode::Train;
    child.run.out_dir = child_dir(&cfg.run.out_dir, n);
    child
}

fn run_sweep(cfg: &RunConfig, dir: &Path, manifest: &mut Manifest) -> Result<()> {
    let sizes = &cfg.run.sweep_n_uavs;
    let children: Vec<RunConfig> = sizes.iter().map(|&n| sweep_child(cfg, n)).collect();
    let results = cfg
        .run
        .exec
        .map_slice(&children, run)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut table = AppendLog::create(
        &dir.join(SWEEP_FILE),
        &["n_uavs", "reward", "reward_stderr", "secrecy_mbps", "secrecy_stderr", "max_sll", "energy_kj", "violations"]
            .map(String::from),
    )?;
    let mut secrecy = Vec::new();
    let mut energy = Vec::new();
    for ((n, child), m) in sizes.iter().zip(&children).zip(&results) {
        let s = m
            .evaluation
            .as_ref()
            .ok_or_else(|| HarnessError::Runtime("sweep child produced no evaluation".into()))?;
        table.append(&[
            n.to_string(),
            fmt_f64(s.reward.mean),
            fmt_f64(s.reward.stderr),
            fmt_f64(s.secrecy_mbps.mean),
            fmt_f64(s.secrecy_mbps.stderr),
            fmt_f64(s.max_sll.mean),
            fmt_f64(s.energy_kj.mean),
            fmt_f64(s.violations.mean),
        ])?;
        secrecy.push(s.secrecy_mbps.mean);
        energy.push(s.energy_kj.mean);
        manifest.children.push(relative(dir, &child.run.out_dir));
    }
    manifest.outputs.push(SWEEP_FILE.into());
    manifest.trend = Some(SweepTrend::new(sizes.clone(), secrecy, energy));
    Ok(())
}

/// Directory of a sweep child.
pub fn child_dir(sweep_dir: &Path, n: usize) -> PathBuf {
    sweep_dir.join(format!("n_uavs_{n}"))
}
