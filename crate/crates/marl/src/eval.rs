//! Deterministic evaluation of trained agents and the random baseline.

use serde::{Deserialize, Serialize};

use swarmsec_core::env::{Environment, RewardWeights, ScenarioConfig};
use swarmsec_core::geometry::Position3D;
use swarmsec_core::seed::{derive, rng_from};
use swarmsec_core::Exec;

use crate::error::Result;
use crate::trainer::{physical_actions, uniform_actions, EpisodeAccumulator, EpisodeLog, Team};

const TAG_RANDOM: u64 = 0x524e444d;

#[derive(Debug, Clone, Copy)]
pub enum Controller<'a> {
    /// Squashed mean actions of a trained team.
    Team(&'a Team),
    /// Uniform actions in `[−1, 1]` on every dimension.
    Random,
}

/// UAV positions after every slot, `positions[t][m]`.
pub type Trajectory = Vec<Vec<Position3D>>;

#[derive(Debug, Clone)]
pub struct EvalEpisode {
    pub seed: u64,
    pub log: EpisodeLog,
    pub trajectory: Option<Trajectory>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// Standard error of the mean; zero for a single sample.
    pub stderr: f64,
}

impl Estimate {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { mean: f64::NAN, stderr: f64::NAN };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, stderr }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub episodes: usize,
    pub reward: Estimate,
    pub secrecy_mbps: Estimate,
    pub max_sll: Estimate,
    pub energy_kj: Estimate,
    pub violations: Estimate,
}

impl EvalSummary {
    pub fn of(logs: &[EpisodeLog]) -> Self {
        let col = |f: fn(&EpisodeLog) -> f64| Estimate::of(&logs.iter().map(f).collect::<Vec<_>>());
        Self {
            episodes: logs.len(),
            reward: col(EpisodeLog::mean_reward),
            secrecy_mbps: col(|l| l.secrecy_mbps),
            max_sll: col(|l| l.max_sll),
            energy_kj: col(|l| l.energy_kj),
            violations: col(|l| l.violations as f64),
        }
    }
}

/// Runs one episode per seed. Episodes are independent, so `exec` may run
/// them in parallel; results keep the order of `seeds`.
pub fn evaluate(
    scenario: &ScenarioConfig,
    rewards: &RewardWeights,
    controller: Controller<'_>,
    seeds: &[u64],
    record_trajectories: bool,
    exec: Exec,
) -> Result<(Vec<EvalEpisode>, EvalSummary)> {
    let episodes = exec
        .map(seeds.len(), |i| {
            run_episode(scenario, rewards, controller, seeds[i], i + 1, record_trajectories)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let logs: Vec<EpisodeLog> = episodes.iter().map(|e| e.log.clone()).collect();
    let summary = EvalSummary::of(&logs);
    Ok((episodes, summary))
}

fn run_episode(
    scenario: &ScenarioConfig,
    rewards: &RewardWeights,
    controller: Controller<'_>,
    seed: u64,
    index: usize,
    record: bool,
) -> Result<EvalEpisode> {
    let n = scenario.n_uavs;
    // the environment itself runs sequentially; parallelism is across episodes
    let mut env = Environment::new(scenario.clone(), *rewards, seed)?.with_exec(Exec::Sequential);
    let mut obs = env.reset(seed)?;
    let mut rng = rng_from(derive(seed, TAG_RANDOM));
    let mut acc = EpisodeAccumulator::new(n, scenario.floor_slot_energy);
    let mut trajectory = record.then(|| vec![env.state().positions()]);
    loop {
        let actions = match controller {
            Controller::Team(t) => t.act_deterministic(&obs)?,
            Controller::Random => uniform_actions(n, &mut rng),
        };
        let result = env.step(&physical_actions(scenario, &actions))?;
        acc.record(&result);
        if let Some(t) = trajectory.as_mut() {
            t.push(env.state().positions());
        }
        obs = result.observation;
        if result.done {
            break;
        }
    }
    Ok(EvalEpisode {
        seed,
        log: acc.finish(index),
        trajectory,
    })
}
