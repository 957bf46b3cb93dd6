//! Training loop: per-agent squashed-Gaussian actors, per-agent critics with
//! shared attention projections, soft targets, Polyak averaging and gravity
//! exploration on the horizontal speed.

use ndarray::{Array2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use swarmsec_core::env::{Environment, RewardWeights, ScenarioConfig, StepResult};
use swarmsec_core::seed::{derive, rng_from, SimRng};

use crate::action::{speed_to_normalised, to_physical, ACT_DIM, SPEED};
use crate::buffer::{Batch, ReplayBuffer, Transition};
use crate::error::{MarlError, Result};
use crate::gravity::{gravity_noise, GravityParams};
use crate::nn::adam::{Adam, AdamConfig};
use crate::nn::critic::{AgentCritic, CriticKind, Projections};
use crate::nn::policy::GaussianPolicy;
use crate::nn::{checkpoint, param_hash, polyak, Parameterized, Tensor};

const TAG_INIT: u64 = 0x494e4954;
const TAG_TRAIN: u64 = 0x5452414e;
const TAG_EPISODE: u64 = 0x45504953;

/// Environment seed of training episode `n` (1-based).
pub fn episode_seed(seed: u64, n: usize) -> u64 {
    derive(derive(seed, TAG_EPISODE), n as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Attention critic with gravity exploration.
    Hmca,
    /// Concatenation critic, no gravity exploration.
    MasacPlain,
    /// Uniform random actions, no learning.
    Random,
}

impl Algorithm {
    pub fn critic_kind(self) -> Option<CriticKind> {
        match self {
            Algorithm::Hmca => Some(CriticKind::Attention),
            Algorithm::MasacPlain => Some(CriticKind::Concat),
            Algorithm::Random => None,
        }
    }

    pub fn uses_gravity(self) -> bool {
        self == Algorithm::Hmca
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Hmca => "hmca",
            Algorithm::MasacPlain => "masac_plain",
            Algorithm::Random => "random",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainerConfig {
    pub episodes: usize,
    pub updates_per_step: usize,
    pub batch_size: usize,
    pub lr: f64,
    /// Global gradient-norm clip per parameter group; `None` disables it.
    pub grad_clip: Option<f64>,
    pub tau: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// Standard deviation `σ₀` of the gravity noise, m/s.
    pub gravity_sigma: f64,
    /// Mean of the gravity noise; `None` uses the energy-optimal speed.
    pub gravity_v_me: Option<f64>,
    /// Stored transitions required before updates begin.
    pub warmup: usize,
    pub buffer_capacity: usize,
    pub hidden: usize,
    pub embed: usize,
    pub d_k: usize,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            episodes: 2000,
            updates_per_step: 1,
            batch_size: 256,
            lr: 3e-4,
            grad_clip: Some(10.0),
            tau: 0.005,
            alpha: 0.01,
            gamma: 0.95,
            gravity_sigma: 2.0,
            gravity_v_me: None,
            warmup: 1000,
            buffer_capacity: 100_000,
            hidden: 256,
            embed: 256,
            d_k: 64,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(MarlError::invalid("trainer.episodes", "must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(MarlError::invalid("trainer.batch_size", "must be >= 1"));
        }
        if self.buffer_capacity < self.batch_size {
            return Err(MarlError::invalid("trainer.buffer_capacity", "must hold at least one batch"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(MarlError::invalid("trainer.lr", "must be > 0"));
        }
        if let Some(c) = self.grad_clip {
            if !(c > 0.0) {
                return Err(MarlError::invalid("trainer.grad_clip", "must be > 0"));
            }
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(MarlError::invalid("trainer.tau", "must lie in (0, 1]"));
        }
        if !(self.gamma >= 0.0 && self.gamma < 1.0) {
            return Err(MarlError::invalid("trainer.gamma", "must lie in [0, 1)"));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(MarlError::invalid("trainer.alpha", "must be >= 0"));
        }
        if !(self.gravity_sigma >= 0.0 && self.gravity_sigma.is_finite()) {
            return Err(MarlError::invalid("trainer.gravity_sigma", "must be >= 0"));
        }
        if let Some(v) = self.gravity_v_me {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(MarlError::invalid("trainer.gravity_v_me", "must be >= 0"));
            }
        }
        if self.hidden == 0 || self.embed == 0 || self.d_k == 0 {
            return Err(MarlError::invalid("trainer.hidden", "network widths must be >= 1"));
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            clip_norm: self.grad_clip,
            ..AdamConfig::default()
        }
    }
}

/// All learnable state of the UAV agents.
#[derive(Debug, Clone)]
pub struct Team {
    pub actors: Vec<GaussianPolicy>,
    pub critics: Vec<AgentCritic>,
    pub proj: Projections,
    pub target_actors: Vec<GaussianPolicy>,
    pub target_critics: Vec<AgentCritic>,
    pub target_proj: Projections,
    actor_opt: Vec<Adam>,
    critic_opt: Vec<Adam>,
    proj_opt: Adam,
}

impl Team {
    pub fn new(
        n_agents: usize,
        obs_dim: usize,
        cfg: &TrainerConfig,
        kind: CriticKind,
        rng: &mut SimRng,
    ) -> Result<Self> {
        let actors: Vec<GaussianPolicy> = (0..n_agents)
            .map(|_| GaussianPolicy::new(obs_dim, ACT_DIM, cfg.hidden, rng))
            .collect();
        let critics = (0..n_agents)
            .map(|m| {
                AgentCritic::new(m, n_agents, obs_dim, ACT_DIM, cfg.embed, cfg.hidden, cfg.d_k, kind, rng)
            })
            .collect::<Result<Vec<_>>>()?;
        let proj = Projections::new(cfg.embed, ACT_DIM, cfg.d_k, rng);
        let adam = cfg.adam();
        Ok(Self {
            actor_opt: actors.iter().map(|a| Adam::new(adam, a)).collect(),
            critic_opt: critics.iter().map(|c| Adam::new(adam, c)).collect(),
            proj_opt: Adam::new(adam, &proj),
            target_actors: actors.clone(),
            target_critics: critics.clone(),
            target_proj: proj.clone(),
            actors,
            critics,
            proj,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.actors.len()
    }

    /// Online and target parameters in a fixed order.
    pub fn tensors(&self) -> Vec<&Tensor> {
        let mut t = Vec::new();
        for group in [&self.actors, &self.target_actors] {
            group.iter().for_each(|a| t.extend(a.tensors()));
        }
        for group in [&self.critics, &self.target_critics] {
            group.iter().for_each(|c| t.extend(c.tensors()));
        }
        t.extend(self.proj.tensors());
        t.extend(self.target_proj.tensors());
        t
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut t = Vec::new();
        for group in [&mut self.actors, &mut self.target_actors] {
            group.iter_mut().for_each(|a| t.extend(a.tensors_mut()));
        }
        for group in [&mut self.critics, &mut self.target_critics] {
            group.iter_mut().for_each(|c| t.extend(c.tensors_mut()));
        }
        t.extend(self.proj.tensors_mut());
        t.extend(self.target_proj.tensors_mut());
        t
    }

    /// Hash of the online actors, which is all that acting depends on.
    pub fn policy_hash(&self) -> String {
        struct Actors<'a>(&'a [GaussianPolicy]);
        impl Parameterized for Actors<'_> {
            fn tensors(&self) -> Vec<&Tensor> {
                self.0.iter().flat_map(|a| a.tensors()).collect()
            }
            fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
                unreachable!("read-only view")
            }
        }
        param_hash(&Actors(&self.actors))
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        checkpoint::save(path, &self.tensors())
    }

    pub fn load(&mut self, path: &std::path::Path) -> Result<()> {
        checkpoint::load(path, &mut self.tensors_mut())
    }

    /// Squashed mean actions for one observation, agent-major.
    pub fn act_deterministic(&self, obs: &[f64]) -> Result<Vec<f64>> {
        let x = Array2::from_shape_vec((1, obs.len()), obs.to_vec()).map_err(|e| MarlError::Shape(e.to_string()))?;
        let mut out = Vec::with_capacity(self.n_agents() * ACT_DIM);
        for a in &self.actors {
            out.extend(a.mean_action(&x)?.iter());
        }
        Ok(out)
    }

    /// Stochastic actions for one observation, agent-major.
    pub fn act_stochastic<R: Rng + ?Sized>(&self, obs: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        let x = Array2::from_shape_vec((1, obs.len()), obs.to_vec()).map_err(|e| MarlError::Shape(e.to_string()))?;
        let mut out = Vec::with_capacity(self.n_agents() * ACT_DIM);
        for a in &self.actors {
            out.extend(a.sample(&x, rng)?.action.iter());
        }
        Ok(out)
    }
}

/// `y = r + γ (Q̄(s', a') − α log π̄(a'_m | s'))`, all `batch × 1`.
pub fn soft_target(rewards: &Tensor, q_next: &Tensor, log_prob_next: &Tensor, alpha: f64, gamma: f64) -> Tensor {
    rewards + &((q_next - &(log_prob_next * alpha)) * gamma)
}

/// Critic loss `mean ½(Q − y)²` with its parameter gradients.
pub fn critic_loss_grad(
    critic: &AgentCritic,
    proj: &Projections,
    obs: &Tensor,
    actions: &[Tensor],
    y: &Tensor,
) -> Result<(f64, AgentCritic, Projections)> {
    let (q, cache) = critic.forward(proj, obs, actions)?;
    let diff = &q - y;
    let b = obs.nrows() as f64;
    let loss = diff.mapv(|d| 0.5 * d * d).sum() / b;
    if !loss.is_finite() {
        return Err(MarlError::Divergence("non-finite critic loss".into()));
    }
    let mut grad = critic.zeros_like();
    let mut grad_proj = proj.zeros_like();
    critic.backward(proj, actions, &cache, &(diff / b), &mut grad, &mut grad_proj);
    Ok((loss, grad, grad_proj))
}

/// Actor loss `mean[α log π(a_m|s) − Q_m(s, â)]` where `â` holds the fresh
/// sample for agent `m` and the buffered actions of everyone else. Only the
/// actor receives gradients.
pub fn actor_loss_grad(
    actor: &GaussianPolicy,
    critic: &AgentCritic,
    proj: &Projections,
    obs: &Tensor,
    buffered: &[Tensor],
    eps: &Tensor,
    alpha: f64,
) -> Result<(f64, GaussianPolicy)> {
    let m = critic.index;
    let out = actor.sample_with(obs, eps)?;
    let mut joint = buffered.to_vec();
    joint[m] = out.action.clone();
    let (q, cache) = critic.forward(proj, obs, &joint)?;
    let b = obs.nrows() as f64;
    let loss = (&out.log_prob * alpha - &q).sum() / b;
    if !loss.is_finite() {
        return Err(MarlError::Divergence("non-finite actor loss".into()));
    }
    let mut scratch = critic.zeros_like();
    let mut scratch_proj = proj.zeros_like();
    let g_q = Array2::from_elem((obs.nrows(), 1), -1.0 / b);
    let inputs = critic.backward(proj, &joint, &cache, &g_q, &mut scratch, &mut scratch_proj);
    let g_log_prob = Array2::from_elem((obs.nrows(), 1), alpha / b);
    let mut grad = actor.zeros_like();
    actor.backward(&out, &inputs.actions[m], &g_log_prob, &mut grad);
    Ok((loss, grad))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UpdateStats {
    pub critic_loss: f64,
    pub actor_loss: f64,
}

fn normal_noise<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Tensor {
    Array2::from_shape_fn((rows, cols), |_| rng.sample(StandardNormal))
}

/// One update round on `batch`: for every agent a critic step, an actor step
/// and a Polyak update; then one step and Polyak update of the shared
/// projections with the gradient summed over agents.
pub fn update_round<R: Rng + ?Sized>(
    team: &mut Team,
    batch: &Batch,
    cfg: &TrainerConfig,
    rng: &mut R,
) -> Result<UpdateStats> {
    let n = team.n_agents();
    let b = batch.len();
    let next: Vec<_> = team
        .target_actors
        .iter()
        .map(|a| a.sample(&batch.next_obs, rng))
        .collect::<Result<_>>()?;
    let next_actions: Vec<Tensor> = next.iter().map(|o| o.action.clone()).collect();
    let mut proj_grad = team.proj.zeros_like();
    let mut stats = UpdateStats::default();
    for (m, nx) in next.iter().enumerate() {
        let (q_next, _) = team.target_critics[m].forward(&team.target_proj, &batch.next_obs, &next_actions)?;
        let r = batch.rewards.column(m).to_owned().insert_axis(Axis(1));
        let y = soft_target(&r, &q_next, &nx.log_prob, cfg.alpha, cfg.gamma);

        let (c_loss, c_grad, p_grad) =
            critic_loss_grad(&team.critics[m], &team.proj, &batch.obs, &batch.actions, &y)?;
        team.critic_opt[m].step(&mut team.critics[m], &c_grad)?;
        proj_grad
            .tensors_mut()
            .into_iter()
            .zip(p_grad.tensors())
            .for_each(|(a, g)| *a += g);

        let eps = normal_noise(b, ACT_DIM, rng);
        let (a_loss, a_grad) = actor_loss_grad(
            &team.actors[m],
            &team.critics[m],
            &team.proj,
            &batch.obs,
            &batch.actions,
            &eps,
            cfg.alpha,
        )?;
        team.actor_opt[m].step(&mut team.actors[m], &a_grad)?;

        polyak(&mut team.target_critics[m], &team.critics[m], cfg.tau);
        polyak(&mut team.target_actors[m], &team.actors[m], cfg.tau);
        stats.critic_loss += c_loss / n as f64;
        stats.actor_loss += a_loss / n as f64;
    }
    if team.critics[0].kind == CriticKind::Attention {
        team.proj_opt.step(&mut team.proj, &proj_grad)?;
        polyak(&mut team.target_proj, &team.proj, cfg.tau);
    }
    Ok(stats)
}

/// Per-episode training or evaluation record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub episode: usize,
    /// Mean reward per slot for every agent.
    pub mean_rewards: Vec<f64>,
    /// Mean secrecy rate over the slots, Mbit/s (unclipped).
    pub secrecy_mbps: f64,
    /// Mean maximum sidelobe ratio over the slots.
    pub max_sll: f64,
    /// Total swarm energy of the episode, kJ.
    pub energy_kj: f64,
    /// Number of (agent, slot) pairs that violated a constraint.
    pub violations: usize,
    pub critic_loss: Option<f64>,
    pub actor_loss: Option<f64>,
}

impl EpisodeLog {
    /// Mean over agents of the per-agent mean reward.
    pub fn mean_reward(&self) -> f64 {
        self.mean_rewards.iter().sum::<f64>() / self.mean_rewards.len().max(1) as f64
    }
}

/// Accumulates slot results into an [`EpisodeLog`].
#[derive(Debug, Clone)]
pub struct EpisodeAccumulator {
    floor_energy: bool,
    slots: usize,
    rewards: Vec<f64>,
    secrecy: f64,
    sll: f64,
    energy_j: f64,
    violations: usize,
    losses: Vec<UpdateStats>,
}

impl EpisodeAccumulator {
    pub fn new(n_agents: usize, floor_energy: bool) -> Self {
        Self {
            floor_energy,
            slots: 0,
            rewards: vec![0.0; n_agents],
            secrecy: 0.0,
            sll: 0.0,
            energy_j: 0.0,
            violations: 0,
            losses: Vec::new(),
        }
    }

    pub fn record(&mut self, r: &StepResult) {
        self.slots += 1;
        self.rewards.iter_mut().zip(&r.rewards).for_each(|(a, x)| *a += x);
        self.secrecy += r.metrics.secrecy_rate / 1e6;
        self.sll += r.metrics.max_sll;
        self.energy_j += r.swarm_energy(self.floor_energy);
        self.violations += r.violations.violating_agents();
    }

    pub fn record_update(&mut self, s: UpdateStats) {
        self.losses.push(s);
    }

    pub fn finish(self, episode: usize) -> EpisodeLog {
        let t = self.slots.max(1) as f64;
        let mean_loss = |f: fn(&UpdateStats) -> f64| {
            (!self.losses.is_empty())
                .then(|| self.losses.iter().map(f).sum::<f64>() / self.losses.len() as f64)
        };
        EpisodeLog {
            episode,
            mean_rewards: self.rewards.iter().map(|r| r / t).collect(),
            secrecy_mbps: self.secrecy / t,
            max_sll: self.sll / t,
            energy_kj: self.energy_j / 1e3,
            violations: self.violations,
            critic_loss: mean_loss(|s| s.critic_loss),
            actor_loss: mean_loss(|s| s.actor_loss),
        }
    }
}

pub fn uniform_actions<R: Rng + ?Sized>(n_agents: usize, rng: &mut R) -> Vec<f64> {
    (0..n_agents * ACT_DIM).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// Physical joint action from agent-major policy outputs.
pub fn physical_actions(
    scenario: &ScenarioConfig,
    policy_actions: &[f64],
) -> Vec<swarmsec_core::uav::UavAction> {
    policy_actions
        .chunks(ACT_DIM)
        .map(|a| to_physical(a, &scenario.limits))
        .collect()
}

pub struct TrainOutcome {
    /// Learned agents; `None` for the random policy.
    pub team: Option<Team>,
    pub logs: Vec<EpisodeLog>,
}

/// Runs the training loop for `algo`. `on_episode` sees every finished
/// episode log (for streaming metric files) and may abort by returning an
/// error.
pub fn train<F>(
    scenario: &ScenarioConfig,
    rewards: &RewardWeights,
    cfg: &TrainerConfig,
    algo: Algorithm,
    seed: u64,
    mut on_episode: F,
) -> Result<TrainOutcome>
where
    F: FnMut(&EpisodeLog) -> Result<()>,
{
    cfg.validate()?;
    let n = scenario.n_uavs;
    let obs_dim = scenario.observation_len();
    let mut env = Environment::new(scenario.clone(), *rewards, episode_seed(seed, 0))?;
    let mut team = match algo.critic_kind() {
        Some(kind) => Some(Team::new(n, obs_dim, cfg, kind, &mut rng_from(derive(seed, TAG_INIT)))?),
        None => None,
    };
    let gravity = GravityParams {
        v_me: cfg.gravity_v_me.unwrap_or_else(|| scenario.energy_optimal_speed()),
        sigma0: cfg.gravity_sigma,
        v_min: scenario.limits.v_min,
        v_max: scenario.limits.v_max,
    };
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity, obs_dim, n, ACT_DIM)?;
    let mut rng = rng_from(derive(seed, TAG_TRAIN));
    let mut logs = Vec::with_capacity(cfg.episodes);

    for episode in 1..=cfg.episodes {
        let mut obs = env.reset(episode_seed(seed, episode))?;
        let mut acc = EpisodeAccumulator::new(n, scenario.floor_slot_energy);
        loop {
            let mut actions = match &team {
                Some(t) => t.act_stochastic(&obs, &mut rng)?,
                None => uniform_actions(n, &mut rng),
            };
            if algo.uses_gravity() {
                for m in 0..n {
                    let k = m * ACT_DIM + SPEED;
                    let raw = to_physical(&actions[m * ACT_DIM..(m + 1) * ACT_DIM], &scenario.limits).h_speed;
                    let noised = gravity_noise(raw, episode, cfg.episodes, &gravity, &mut rng);
                    actions[k] = speed_to_normalised(noised, &scenario.limits);
                }
            }
            let result = env.step(&physical_actions(scenario, &actions))?;
            acc.record(&result);
            if let Some(t) = team.as_mut() {
                buffer.push(Transition {
                    obs: obs.clone(),
                    actions,
                    rewards: result.rewards.clone(),
                    next_obs: result.observation.clone(),
                })?;
                if buffer.len() >= cfg.warmup.max(cfg.batch_size) {
                    for _ in 0..cfg.updates_per_step {
                        let batch = buffer.sample(cfg.batch_size, &mut rng)?;
                        acc.record_update(update_round(t, &batch, cfg, &mut rng)?);
                    }
                }
            }
            obs = result.observation;
            if result.done {
                break;
            }
        }
        let log = acc.finish(episode);
        on_episode(&log)?;
        logs.push(log);
    }
    Ok(TrainOutcome { team, logs })
}

/// Mean of the per-episode mean rewards over the last `k` logs.
pub fn trailing_mean_reward(logs: &[EpisodeLog], k: usize) -> f64 {
    let tail = &logs[logs.len().saturating_sub(k)..];
    tail.iter().map(EpisodeLog::mean_reward).sum::<f64>() / tail.len().max(1) as f64
}

/// First episode (1-based) whose `window`-episode trailing mean reward
/// reaches `fraction` of the final trailing mean, measured on the rising
/// side: the threshold is `first + fraction·(final − first)`.
pub fn episodes_to_fraction(logs: &[EpisodeLog], window: usize, fraction: f64) -> Option<usize> {
    if logs.is_empty() {
        return None;
    }
    let w = window.max(1);
    let smooth: Vec<f64> = (0..logs.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(w);
            logs[lo..=i].iter().map(EpisodeLog::mean_reward).sum::<f64>() / (i + 1 - lo) as f64
        })
        .collect();
    let first = smooth[0];
    let last = smooth[smooth.len() - 1];
    let threshold = first + fraction * (last - first);
    smooth
        .iter()
        .position(|&v| if last >= first { v >= threshold } else { v <= threshold })
        .map(|i| logs[i].episode)
}
