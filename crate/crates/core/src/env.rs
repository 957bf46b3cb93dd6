//! Multi-agent environment: one UAV agent per swarm member plus the IRS,
//! whose phases come from the closed-form policy every slot.
//!
//! A slot proceeds as follows: move the UAVs, move the ground nodes, assess
//! boundary and collision violations, clip violators back into the flyable
//! box, set the IRS phases, realize channels, evaluate the slot metrics and
//! hand out per-agent rewards.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::beamforming::VaaConfig;
use crate::channel::{realize_channels, ChannelParams, ChannelSet, LinkGeometry};
use crate::error::{Result, SimError};
use crate::exec::Exec;
use crate::geometry::{link_trig, GaussMarkovWalker, Position3D, Rect, WalkerParams};
use crate::irs::{closed_form_phases, PhaseShiftVector};
use crate::link::{slot_metrics, MetricResolution, RadioParams, SlotMetrics};
use crate::seed::{derive, rng_from, SimRng};
use crate::uav::{
    advance, energy_optimal_speed, slot_energy, MobilityLimits, PropulsionParams, UavAction,
    UavState,
};

/// Maximum placement attempts per UAV during [`reset`].
pub const MAX_PLACEMENT_TRIES: usize = 10_000;

/// Static description of the simulated world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub n_uavs: usize,
    /// Flyable horizontal area `[L_min, L_max]²`.
    pub area: Rect,
    pub altitude_min: f64,
    pub altitude_max: f64,
    /// Minimum pairwise UAV distance, m.
    pub d_min: f64,
    /// Area in which the user and the eavesdropper move.
    pub ground_area: Rect,
    pub irs_position: Position3D,
    /// Antenna array efficiency η.
    pub efficiency: f64,
    pub horizon: usize,
    /// Slot duration, s.
    pub dt: f64,
    /// Report per-slot energies floored at zero instead of signed.
    pub floor_slot_energy: bool,
    pub channel: ChannelParams,
    pub radio: RadioParams,
    pub propulsion: PropulsionParams,
    pub limits: MobilityLimits,
    pub walker: WalkerParams,
    pub resolution: MetricResolution,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_uavs: 8,
            area: Rect::square(0.0, 100.0),
            altitude_min: 75.0,
            altitude_max: 95.0,
            d_min: 0.5,
            ground_area: Rect::square(0.0, 100.0),
            irs_position: Position3D::new(100.0, 50.0, 20.0),
            efficiency: 1.0,
            horizon: 100,
            dt: 1.0,
            floor_slot_energy: false,
            channel: ChannelParams::default(),
            radio: RadioParams::default(),
            propulsion: PropulsionParams::default(),
            limits: MobilityLimits::default(),
            walker: WalkerParams::default(),
            resolution: MetricResolution::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_uavs == 0 {
            return Err(SimError::invalid("scenario.n_uavs", "must be >= 1"));
        }
        self.area.validate("scenario.area")?;
        self.ground_area.validate("scenario.ground_area")?;
        if !(self.altitude_min.is_finite()
            && self.altitude_max.is_finite()
            && self.altitude_min < self.altitude_max)
        {
            return Err(SimError::invalid("scenario.altitude", "need altitude_min < altitude_max"));
        }
        if self.altitude_min <= 0.0 {
            return Err(SimError::invalid("scenario.altitude_min", "UAVs must fly above ground"));
        }
        if !(self.d_min >= 0.0 && self.d_min.is_finite()) {
            return Err(SimError::invalid("scenario.d_min", "must be >= 0"));
        }
        if !self.irs_position.is_finite() || self.irs_position.z <= 0.0 {
            return Err(SimError::invalid("scenario.irs_position", "must be finite and above ground"));
        }
        if self.irs_position.z >= self.altitude_min {
            return Err(SimError::invalid("scenario.irs_position", "IRS must sit below the flyable box"));
        }
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(SimError::invalid("scenario.efficiency", "must lie in [0, 1]"));
        }
        if self.horizon == 0 {
            return Err(SimError::invalid("scenario.horizon", "must be >= 1"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SimError::invalid("scenario.dt", "must be > 0"));
        }
        self.channel.validate()?;
        self.radio.validate()?;
        self.propulsion.validate()?;
        self.limits.validate()?;
        self.walker.validate()?;
        self.resolution.validate()?;
        Ok(())
    }

    /// Length of the shared observation vector.
    pub fn observation_len(&self) -> usize {
        3 * self.n_uavs + 4
    }

    pub fn box_center(&self) -> Position3D {
        let (x, y) = self.area.center();
        Position3D::new(x, y, 0.5 * (self.altitude_min + self.altitude_max))
    }

    /// Diagonal of the flyable area, used to normalise distances.
    pub fn area_diagonal(&self) -> f64 {
        (self.area.x_max - self.area.x_min).hypot(self.area.y_max - self.area.y_min)
    }

    pub fn in_box(&self, p: &Position3D) -> bool {
        self.area.contains(p.x, p.y) && p.z >= self.altitude_min && p.z <= self.altitude_max
    }

    pub fn clip_to_box(&self, p: &Position3D) -> Position3D {
        let (x, y) = self.area.clamp(p.x, p.y);
        Position3D::new(x, y, p.z.clamp(self.altitude_min, self.altitude_max))
    }

    pub fn energy_optimal_speed(&self) -> f64 {
        energy_optimal_speed(&self.propulsion, self.limits.v_max)
    }
}

/// Reward shaping constants. `eps1`, `eps2` and `eps3` multiply the secrecy
/// rate in Mbit/s, the raw SLL ratio and the swarm energy in kJ; `eta1` and
/// `eta2` are the boundary and collision penalties, `zeta1` and `zeta2` the
/// incentive weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardWeights {
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub zeta1: f64,
    pub zeta2: f64,
    /// Reference point of the positional incentive; `None` is the box center.
    pub reference_point: Option<Position3D>,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            eps1: 1.0,
            eps2: -0.5,
            eps3: -0.1,
            eta1: 10.0,
            eta2: 10.0,
            zeta1: 0.1,
            zeta2: 0.05,
            reference_point: None,
        }
    }
}

impl RewardWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.eps1,
            self.eps2,
            self.eps3,
            self.eta1,
            self.eta2,
            self.zeta1,
            self.zeta2,
        ];
        if !all.iter().all(|v| v.is_finite()) {
            return Err(SimError::invalid("reward", "weights must be finite"));
        }
        if self.eta1 < 0.0 || self.eta2 < 0.0 {
            return Err(SimError::invalid("reward.penalty", "penalties must be >= 0"));
        }
        Ok(())
    }
}

/// Full dynamic state of the world.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub uavs: Vec<UavState>,
    pub user: GaussMarkovWalker,
    pub eaves: GaussMarkovWalker,
    pub irs_pos: Position3D,
    /// Slot about to be played, `1..=T`.
    pub slot: usize,
    pub finished: bool,
}

impl WorldState {
    pub fn positions(&self) -> Vec<Position3D> {
        self.uavs.iter().map(|u| u.position).collect()
    }
}

/// Per-UAV and pairwise constraint flags of one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violations {
    /// `Z¹_m`: UAV `m` left the flyable box.
    pub boundary: Vec<bool>,
    /// `Z²_{mm'}` as a list of colliding pairs `(m, m')` with `m < m'`.
    pub collisions: Vec<(usize, usize)>,
}

impl Violations {
    pub fn collisions_of(&self, m: usize) -> usize {
        self.collisions
            .iter()
            .filter(|&&(a, b)| a == m || b == m)
            .count()
    }

    pub fn violates(&self, m: usize) -> bool {
        self.boundary[m] || self.collisions_of(m) > 0
    }

    pub fn violating_agents(&self) -> usize {
        (0..self.boundary.len()).filter(|&m| self.violates(m)).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Vec<f64>,
    pub rewards: Vec<f64>,
    /// Incentive `b_m` of every agent (included in the reward only for agents
    /// that satisfy all constraints).
    pub incentives: Vec<f64>,
    /// Per-UAV signed slot eps3, J.
    pub energies: Vec<f64>,
    pub metrics: SlotMetrics,
    pub phases: PhaseShiftVector,
    pub channels: ChannelSet,
    pub violations: Violations,
    pub done: bool,
}

impl StepResult {
    /// Swarm eps3 of the slot in J, honouring the flooring flag.
    pub fn swarm_energy(&self, floor: bool) -> f64 {
        self.energies
            .iter()
            .map(|&e| if floor { e.max(0.0) } else { e })
            .sum()
    }
}

fn normalise(v: f64, lo: f64, hi: f64) -> f64 {
    2.0 * (v - lo) / (hi - lo) - 1.0
}

fn denormalise(v: f64, lo: f64, hi: f64) -> f64 {
    lo + 0.5 * (v + 1.0) * (hi - lo)
}

/// Shared observation: all UAV `(x, y, z)` followed by `(x_u, y_u, x_e, y_e)`,
/// each mapped to `[−1, 1]` by the box and ground-area bounds.
pub fn observe(cfg: &ScenarioConfig, state: &WorldState) -> Vec<f64> {
    let mut obs = Vec::with_capacity(cfg.observation_len());
    for u in &state.uavs {
        obs.push(normalise(u.position.x, cfg.area.x_min, cfg.area.x_max));
        obs.push(normalise(u.position.y, cfg.area.y_min, cfg.area.y_max));
        obs.push(normalise(u.position.z, cfg.altitude_min, cfg.altitude_max));
    }
    let g = &cfg.ground_area;
    for w in [&state.user, &state.eaves] {
        obs.push(normalise(w.position.x, g.x_min, g.x_max));
        obs.push(normalise(w.position.y, g.y_min, g.y_max));
    }
    obs
}

/// `(uav positions, user (x, y), eavesdropper (x, y))`.
pub type DecodedObservation = (Vec<Position3D>, (f64, f64), (f64, f64));

/// Raw coordinates recovered from an observation.
pub fn denormalise_observation(cfg: &ScenarioConfig, obs: &[f64]) -> Result<DecodedObservation> {
    if obs.len() != cfg.observation_len() {
        return Err(SimError::LengthMismatch {
            expected: cfg.observation_len(),
            got: obs.len(),
        });
    }
    let uavs = obs[..3 * cfg.n_uavs]
        .chunks(3)
        .map(|c| {
            Position3D::new(
                denormalise(c[0], cfg.area.x_min, cfg.area.x_max),
                denormalise(c[1], cfg.area.y_min, cfg.area.y_max),
                denormalise(c[2], cfg.altitude_min, cfg.altitude_max),
            )
        })
        .collect();
    let g = &cfg.ground_area;
    let t = &obs[3 * cfg.n_uavs..];
    Ok((
        uavs,
        (denormalise(t[0], g.x_min, g.x_max), denormalise(t[1], g.y_min, g.y_max)),
        (denormalise(t[2], g.x_min, g.x_max), denormalise(t[3], g.y_min, g.y_max)),
    ))
}

/// Exploration incentive `ζ₁ cos∠(UAV→IRS, displacement) − ζ₂ ‖UAV→r‖ / diag`
/// with `diag` the diagonal of the flyable area. The directional term is zero
/// when the UAV did not move.
pub fn incentive(
    cfg: &ScenarioConfig,
    w: &RewardWeights,
    before: &Position3D,
    after: &Position3D,
    irs: &Position3D,
) -> f64 {
    let to_irs = before.to(irs);
    let disp = before.to(after);
    let denom = to_irs.norm() * disp.norm();
    let directional = if denom > 0.0 {
        (to_irs.dot(&disp) / denom).clamp(-1.0, 1.0)
    } else {
        0.0
    };
    let reference = w.reference_point.unwrap_or_else(|| cfg.box_center());
    let positional = after.distance(&reference) / cfg.area_diagonal();
    w.zeta1 * directional - w.zeta2 * positional
}

/// Objective part of the reward, shared by every agent that satisfies the
/// constraints. Negative secrecy is clipped to zero here only.
pub fn objective_reward(w: &RewardWeights, metrics: &SlotMetrics, swarm_energy_j: f64) -> f64 {
    w.eps1 * metrics.secrecy_rate.max(0.0) / 1e6
        + w.eps2 * metrics.max_sll
        + w.eps3 * swarm_energy_j / 1e3
}

/// Per-agent reward: `Ψ + b` when the agent satisfies every constraint,
/// `−η₁ Z¹ − η₂ Σ Z²` otherwise.
pub fn agent_reward(
    w: &RewardWeights,
    psi: f64,
    incentive: f64,
    out_of_bounds: bool,
    collisions: usize,
) -> f64 {
    if !out_of_bounds && collisions == 0 {
        psi + incentive
    } else {
        -w.eta1 * f64::from(u8::from(out_of_bounds)) - w.eta2 * collisions as f64
    }
}

/// Initial world state: UAVs uniform in the flyable box with rejection until
/// all pairwise distances are at least `d_min`, ground nodes uniform in the
/// ground area with random mean headings.
pub fn reset<R: RngCore + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<WorldState> {
    let mut uavs: Vec<UavState> = Vec::with_capacity(cfg.n_uavs);
    for _ in 0..cfg.n_uavs {
        let mut placed = false;
        for _ in 0..MAX_PLACEMENT_TRIES {
            let (x, y) = cfg.area.sample(rng);
            let z = rng.random_range(cfg.altitude_min..=cfg.altitude_max);
            let p = Position3D::new(x, y, z);
            if uavs.iter().all(|u| u.position.distance(&p) >= cfg.d_min) {
                uavs.push(UavState::at(p));
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(SimError::Infeasible(format!(
                "could not place {} UAVs with d_min = {} after {} tries",
                cfg.n_uavs, cfg.d_min, MAX_PLACEMENT_TRIES
            )));
        }
    }
    let walker = |rng: &mut R| {
        let (x, y) = cfg.ground_area.sample(rng);
        let heading = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        GaussMarkovWalker::new(
            x,
            y,
            cfg.walker.mean_speed,
            heading,
            heading,
            cfg.walker,
            cfg.ground_area,
            rng.next_u64(),
        )
    };
    let user = walker(rng);
    let eaves = walker(rng);
    Ok(WorldState {
        uavs,
        user,
        eaves,
        irs_pos: cfg.irs_position,
        slot: 1,
        finished: false,
    })
}

fn check_actions(cfg: &ScenarioConfig, actions: &[UavAction]) -> Result<()> {
    if actions.len() != cfg.n_uavs {
        return Err(SimError::MalformedAction(format!(
            "expected {} actions, got {}",
            cfg.n_uavs,
            actions.len()
        )));
    }
    let eps = 1e-9;
    for (m, a) in actions.iter().enumerate() {
        let ok = (-eps..=1.0 + eps).contains(&a.weight)
            && (-eps..=cfg.limits.v_max + eps).contains(&a.h_speed)
            && a.h_direction.is_finite()
            && (-cfg.limits.l_max - eps..=cfg.limits.l_max + eps).contains(&a.v_speed);
        if !ok {
            return Err(SimError::MalformedAction(format!("action of UAV {m} out of range: {a:?}")));
        }
    }
    Ok(())
}

/// Builds the VAA configuration of the current swarm.
pub fn vaa_of(cfg: &ScenarioConfig, uavs: &[UavState]) -> Result<VaaConfig> {
    VaaConfig::new(
        uavs.iter().map(|u| u.position).collect(),
        uavs.iter().map(|u| u.weight).collect(),
        cfg.channel.carrier_wavelength,
        cfg.efficiency,
    )
}

/// One slot of the environment as a pure function of the state, the joint
/// action and the channel random stream.
pub fn transition<R: RngCore + ?Sized>(
    cfg: &ScenarioConfig,
    weights: &RewardWeights,
    state: &WorldState,
    actions: &[UavAction],
    channel_rng: &mut R,
    exec: Exec,
) -> Result<(WorldState, StepResult)> {
    if state.finished {
        return Err(SimError::EpisodeFinished);
    }
    check_actions(cfg, actions)?;
    let n = cfg.n_uavs;

    // kinematics
    let moved: Vec<UavState> = state
        .uavs
        .iter()
        .zip(actions)
        .map(|(u, a)| {
            let act = UavAction {
                weight: a.weight.clamp(0.0, 1.0),
                ..*a
            };
            advance(u, &act, cfg.dt).0
        })
        .collect();

    // constraints on the commanded positions
    let boundary: Vec<bool> = moved.iter().map(|u| !cfg.in_box(&u.position)).collect();
    let mut collisions = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if moved[a].position.distance(&moved[b].position) < cfg.d_min {
                collisions.push((a, b));
            }
        }
    }
    let violations = Violations {
        boundary,
        collisions,
    };

    // violators are put back into the box; speeds follow the actual motion
    let uavs: Vec<UavState> = state
        .uavs
        .iter()
        .zip(&moved)
        .map(|(before, after)| {
            let position = cfg.clip_to_box(&after.position);
            UavState {
                position,
                weight: after.weight,
                avg_speed_prev: before.position.distance(&position) / cfg.dt,
            }
        })
        .collect();
    let energies: Vec<f64> = state
        .uavs
        .iter()
        .zip(&uavs)
        .zip(actions)
        .map(|((b, a), act)| slot_energy(b, a, act, &cfg.propulsion, cfg.dt))
        .collect();

    let mut user = state.user.clone();
    let mut eaves = state.eaves.clone();
    user.step(cfg.dt);
    eaves.step(cfg.dt);

    // IRS policy, channels and metrics on the new geometry
    let vaa = vaa_of(cfg, &uavs)?;
    let center = vaa.centroid();
    let phases = closed_form_phases(
        &link_trig(&center, &state.irs_pos)?,
        &link_trig(&state.irs_pos, &user.position)?,
        &cfg.channel,
    );
    let geom = LinkGeometry {
        vaa: &vaa,
        irs: state.irs_pos,
        user: user.position,
        eaves: eaves.position,
    };
    let channels = realize_channels(&geom, &cfg.channel, channel_rng)?;
    let metrics = slot_metrics(&geom, &channels, &phases, &cfg.radio, &cfg.resolution, exec)?;

    let swarm_energy: f64 = energies.iter().sum();
    let psi = objective_reward(weights, &metrics, swarm_energy);
    let incentives: Vec<f64> = state
        .uavs
        .iter()
        .zip(&uavs)
        .map(|(b, a)| incentive(cfg, weights, &b.position, &a.position, &state.irs_pos))
        .collect();
    let rewards = (0..n)
        .map(|m| {
            agent_reward(
                weights,
                psi,
                incentives[m],
                violations.boundary[m],
                violations.collisions_of(m),
            )
        })
        .collect();

    let done = state.slot >= cfg.horizon;
    let next = WorldState {
        uavs,
        user,
        eaves,
        irs_pos: state.irs_pos,
        slot: if done { state.slot } else { state.slot + 1 },
        finished: done,
    };
    let observation = observe(cfg, &next);
    Ok((
        next,
        StepResult {
            observation,
            rewards,
            incentives,
            energies,
            metrics,
            phases,
            channels,
            violations,
            done,
        },
    ))
}

/// Stateful wrapper around [`reset`] and [`transition`].
#[derive(Debug, Clone)]
pub struct Environment {
    pub config: ScenarioConfig,
    pub rewards: RewardWeights,
    pub exec: Exec,
    state: WorldState,
    channel_rng: SimRng,
}

impl Environment {
    /// Validates the configuration and resets with `seed`.
    pub fn new(config: ScenarioConfig, rewards: RewardWeights, seed: u64) -> Result<Self> {
        config.validate()?;
        rewards.validate()?;
        let mut reset_rng = rng_from(derive(seed, 0));
        let state = reset(&config, &mut reset_rng)?;
        Ok(Self {
            config,
            rewards,
            exec: Exec::default(),
            state,
            channel_rng: rng_from(derive(seed, 1)),
        })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    /// Starts a new episode determined entirely by `seed`.
    pub fn reset(&mut self, seed: u64) -> Result<Vec<f64>> {
        let mut reset_rng = rng_from(derive(seed, 0));
        self.state = reset(&self.config, &mut reset_rng)?;
        self.channel_rng = rng_from(derive(seed, 1));
        Ok(self.observe())
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    pub fn observe(&self) -> Vec<f64> {
        observe(&self.config, &self.state)
    }

    pub fn step(&mut self, actions: &[UavAction]) -> Result<StepResult> {
        let (next, result) = transition(
            &self.config,
            &self.rewards,
            &self.state,
            actions,
            &mut self.channel_rng,
            self.exec,
        )?;
        self.state = next;
        Ok(result)
    }

    /// Replaces the world state (testing and replay).
    pub fn set_state(&mut self, state: WorldState) {
        self.state = state;
    }
}
