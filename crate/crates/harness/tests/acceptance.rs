//! Acceptance criteria. Runs every criterion in sequence and prints one
//! PASS/FAIL line each; exits non-zero if a non-informational criterion fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use ndarray::Array2;
use rand::Rng;

use swarmsec_core::beamforming::{
    array_factor, directive_gain_with_integral, max_sidelobe_ratio, radiated_power_integral, VaaConfig,
    DEFAULT_SLL_RESOLUTION, ONE_DEGREE,
};
use swarmsec_core::channel::{
    channel_irs_ground, channel_vaa_ground, steering_vector, ChannelParams, PURE_LOS_RICIAN_K,
};
use swarmsec_core::env::{reset, transition, RewardWeights, ScenarioConfig};
use swarmsec_core::geometry::{angles_between, link_trig, DirectionAngles, Position3D};
use swarmsec_core::irs::{closed_form_phases, reflection_apply, PhaseShiftVector};
use swarmsec_core::link::MetricResolution;
use swarmsec_core::seed::{derive, rng_from};
use swarmsec_core::uav::{
    advance, energy_optimal_speed, gravitational_term, propulsion_power, PropulsionParams, UavAction, UavState,
};
use swarmsec_core::{Complex64, Exec};
use swarmsec_harness::{parse_config, run};
use swarmsec_marl::action::ACT_DIM;
use swarmsec_marl::eval::{evaluate, Controller};
use swarmsec_marl::nn::critic::CriticKind;
use swarmsec_marl::nn::{Parameterized, Tensor};
use swarmsec_marl::trainer::{
    actor_loss_grad, critic_loss_grad, episodes_to_fraction, train, trailing_mean_reward, Algorithm, EpisodeLog,
    Team, TrainOutcome, TrainerConfig,
};

type Outcome = Result<String, String>;

const DESK_SEED: u64 = 7;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit_s: f64, detail: String) -> Outcome {
    check(
        elapsed.as_secs_f64() < limit_s,
        format!("{detail}; {:.2} s (limit {limit_s} s)", elapsed.as_secs_f64()),
    )
}

fn ac1_gain_normalisation() -> Outcome {
    let t = Instant::now();
    let cfg = VaaConfig::new(vec![Position3D::new(12.0, -4.0, 80.0)], vec![1.0], 0.125, 1.0).unwrap();
    let integral = radiated_power_integral(&cfg, ONE_DEGREE);
    let mut rng = rng_from(101);
    let mut worst = 0.0f64;
    let grid = (0..=18).flat_map(|i| (0..36).map(move |j| (i as f64 * 10.0 * ONE_DEGREE, -PI + j as f64 * 10.0 * ONE_DEGREE)));
    let random: Vec<(f64, f64)> = (0..1000).map(|_| (rng.random_range(0.0..=PI), rng.random_range(-PI..PI))).collect();
    for (theta, phi) in grid.chain(random) {
        let g = directive_gain_with_integral(&cfg, &DirectionAngles::new(theta, phi), integral).unwrap();
        worst = worst.max((g - 1.0).abs());
    }
    if worst >= 1e-3 {
        return Err(format!("max |G − 1| = {worst:.2e}"));
    }
    within(t.elapsed(), 1.0, format!("max |G − 1| = {worst:.2e} over 1663 directions"))
}

fn ac2_translation_invariance() -> Outcome {
    let t = Instant::now();
    let mut rng = rng_from(102);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(1..=8);
        let pts: Vec<Position3D> = (0..n)
            .map(|_| Position3D::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0), rng.random_range(75.0..95.0)))
            .collect();
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=1.0)).collect();
        let shift = Position3D::new(rng.random_range(-100.0..100.0), rng.random_range(-100.0..100.0), rng.random_range(-20.0..20.0));
        let a = VaaConfig::new(pts.clone(), w.clone(), 0.125, 1.0).unwrap();
        let b = VaaConfig::new(pts.iter().map(|p| p.translate(&shift)).collect(), w, 0.125, 1.0).unwrap();
        let dir = DirectionAngles::new(rng.random_range(0.0..=PI), rng.random_range(-PI..PI));
        worst = worst.max((array_factor(&a, &dir).norm() - array_factor(&b, &dir).norm()).abs());
    }
    if worst >= 1e-9 {
        return Err(format!("max ||AF| difference| = {worst:.2e}"));
    }
    within(t.elapsed(), 5.0, format!("max ||AF| difference| = {worst:.2e} over 1000 cases"))
}

/// Sidelobe of an `n`-element half-wavelength line, found by walking a
/// 0.1° grid of the angle to the array axis out of the broadside lobe.
fn ula_brute_force(n: usize) -> f64 {
    let steps = 1800;
    let mag: Vec<f64> = (0..=steps)
        .map(|i| {
            let psi = PI * (i as f64 * 0.1 * ONE_DEGREE).cos();
            let den = (psi / 2.0).sin();
            if den.abs() < 1e-12 {
                1.0
            } else {
                ((n as f64 * psi / 2.0).sin() / (n as f64 * den)).abs()
            }
        })
        .collect();
    let c = steps / 2;
    let (mut lo, mut hi) = (c, c);
    while lo > 0 && mag[lo - 1] <= mag[lo] {
        lo -= 1;
    }
    while hi < steps && mag[hi + 1] <= mag[hi] {
        hi += 1;
    }
    (0..=steps).filter(|i| *i < lo || *i > hi).map(|i| mag[i]).fold(0.0, f64::max)
}

fn ac3_ula_sidelobe() -> Outcome {
    let t = Instant::now();
    let cfg = VaaConfig::new((0..8).map(|m| Position3D::new(0.5 * m as f64, 0.0, 0.0)).collect(), vec![1.0; 8], 1.0, 1.0)
        .unwrap();
    let r = max_sidelobe_ratio(&cfg, &DirectionAngles::new(PI / 2.0, PI / 2.0), DEFAULT_SLL_RESOLUTION).unwrap();
    let oracle = ula_brute_force(8);
    let (r_db, o_db) = (20.0 * r.log10(), 20.0 * oracle.log10());
    if (r_db - o_db).abs() >= 0.3 {
        return Err(format!("{r_db:.3} dB vs brute force {o_db:.3} dB"));
    }
    within(t.elapsed(), 10.0, format!("{r_db:.3} dB vs brute force {o_db:.3} dB"))
}

fn ac4_irs_optimality() -> Outcome {
    let t = Instant::now();
    let p = ChannelParams { irs_rows: 8, irs_cols: 8, ..Default::default() };
    let mut rng = rng_from(104);
    let irs = Position3D::new(100.0, 50.0, 20.0);
    let mut worst_margin = f64::INFINITY;
    let mut worst_arg = 0.0f64;
    for _ in 0..100 {
        let vaa = Position3D::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0), rng.random_range(75.0..95.0));
        let user = Position3D::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0), 0.0);
        let (ar, ru) = (link_trig(&vaa, &irs).unwrap(), link_trig(&irs, &user).unwrap());
        let (sa, sr) = (steering_vector(&ar, &p), steering_vector(&ru, &p));
        let w = closed_form_phases(&ar, &ru, &p);
        let best = reflection_apply(&w, &sa, &sr).unwrap().norm();
        let terms: Vec<Complex64> = w.phases().iter().zip(sa.iter().zip(&sr)).map(|(x, (a, b))| a * Complex64::from_polar(1.0, *x) * b).collect();
        for z in &terms {
            let d = (z.arg() - terms[0].arg() + PI).rem_euclid(2.0 * PI) - PI;
            worst_arg = worst_arg.max(d.abs());
        }
        for _ in 0..10_000 {
            let v = PhaseShiftVector::from_phases((0..64).map(|_| rng.random_range(0.0..2.0 * PI)));
            let m = reflection_apply(&v, &sa, &sr).unwrap().norm();
            worst_margin = worst_margin.min(best / m - 1.0);
        }
    }
    if worst_margin < -1e-6 || worst_arg >= 1e-9 {
        return Err(format!("worst margin {worst_margin:.3e}, max argument spread {worst_arg:.2e}"));
    }
    within(
        t.elapsed(),
        60.0,
        format!("closed form beats 10⁶ random vectors (min margin {worst_margin:.3}), argument spread {worst_arg:.1e}"),
    )
}

fn ac5_channel_statistics() -> Outcome {
    let t = Instant::now();
    let irs = Position3D::new(100.0, 50.0, 20.0);
    let rx = Position3D::new(40.0, 70.0, 0.0);
    let mut notes = Vec::new();
    // Rician IRS → ground: 10⁴ rounds × 100 elements
    for k in [0.0, 10.0] {
        let p = ChannelParams { irs_rows: 10, irs_cols: 10, rician_k: k, ..Default::default() };
        let expected = p.path_loss_ref * irs.distance(&rx).powf(-p.alpha_reflect);
        let mut rng = rng_from(105);
        let mut acc = 0.0;
        for _ in 0..10_000 {
            acc += channel_irs_ground(&irs, &rx, &p, &mut rng).unwrap().iter().map(|h| h.norm_sqr()).sum::<f64>();
        }
        let ratio = acc / 1e6 / expected;
        if (ratio - 1.0).abs() >= 0.02 {
            return Err(format!("Rician β={k}: power ratio {ratio:.4}"));
        }
        notes.push(format!("Rician β={k} {ratio:.4}"));
    }
    // Rayleigh VAA → ground, 10⁶ draws
    let p = ChannelParams::default();
    let vaa = VaaConfig::new(
        vec![Position3D::new(30.0, 30.0, 80.0), Position3D::new(31.0, 30.5, 82.0)],
        vec![1.0, 0.6],
        p.carrier_wavelength,
        1.0,
    )
    .unwrap();
    let c = vaa.centroid();
    let af2 = array_factor(&vaa, &angles_between(&c, &rx).unwrap()).norm_sqr();
    let expected = af2 * p.path_loss_ref * c.distance(&rx).powf(-p.alpha_direct);
    let mut rng = rng_from(106);
    let acc: f64 = (0..1_000_000).map(|_| channel_vaa_ground(&vaa, &c, &rx, &p, &mut rng).unwrap().norm_sqr()).sum();
    let ratio = acc / 1e6 / expected;
    if (ratio - 1.0).abs() >= 0.02 {
        return Err(format!("Rayleigh power ratio {ratio:.4}"));
    }
    notes.push(format!("Rayleigh {ratio:.4}"));
    // β → ∞
    let p = ChannelParams { irs_rows: 4, irs_cols: 4, rician_k: PURE_LOS_RICIAN_K, ..Default::default() };
    let amp = (p.path_loss_ref * irs.distance(&rx).powf(-p.alpha_reflect)).sqrt();
    let los = steering_vector(&link_trig(&irs, &rx).unwrap(), &p);
    let h = channel_irs_ground(&irs, &rx, &p, &mut rng).unwrap();
    let dev = h.iter().zip(&los).map(|(a, b)| (a - b * amp).norm() / amp).fold(0.0, f64::max);
    if dev >= 1e-6 {
        return Err(format!("LoS collapse deviation {dev:.2e}"));
    }
    notes.push(format!("LoS collapse {dev:.1e}"));
    within(t.elapsed(), 60.0, notes.join(", "))
}

fn ac6_energy_model() -> Outcome {
    let t = Instant::now();
    let p = PropulsionParams::default();
    let hover = propulsion_power(0.0, &p);
    if hover != p.blade_power + p.induced_power {
        return Err(format!("hover {hover} ≠ {}", p.blade_power + p.induced_power));
    }
    let mut rng = rng_from(107);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let mut s = UavState::at(Position3D::new(50.0, 50.0, rng.random_range(75.0..95.0)));
        let z0 = s.position.z;
        let mut total = 0.0;
        for _ in 0..100 {
            let a = UavAction {
                weight: 1.0,
                h_speed: rng.random_range(0.0..15.0),
                h_direction: rng.random_range(0.0..2.0 * PI),
                v_speed: rng.random_range(-3.0..3.0),
            };
            let (next, _) = advance(&s, &a, 1.0);
            total += gravitational_term(&s, &next, &p);
            s = next;
        }
        let direct = p.mass * p.gravity * (s.position.z - z0);
        worst = worst.max((total - direct).abs());
    }
    // one ulp-scale rounding per slot on terms of order m·g·Δz
    if worst > 1e-9 {
        return Err(format!("telescoping residual {worst:.2e} J"));
    }
    let v = energy_optimal_speed(&p, 15.0);
    let grid = (0..=15_000)
        .map(|i| i as f64 * 1e-3)
        .min_by(|a, b| propulsion_power(*a, &p).total_cmp(&propulsion_power(*b, &p)))
        .unwrap();
    if (v - grid).abs() >= 0.01 {
        return Err(format!("optimal speed {v:.4} vs grid {grid:.4}"));
    }
    within(
        t.elapsed(),
        5.0,
        format!("hover exact, telescoping residual {worst:.1e} J, v* = {v:.4} vs grid {grid:.3} m/s"),
    )
}

/// `‖analytic − numeric‖ / max(‖analytic‖, ‖numeric‖)` with central
/// differences over every parameter.
fn fd_relative_error<P: Parameterized + Clone>(params: &P, grad: &P, loss: impl Fn(&P) -> f64) -> f64 {
    let h = 1e-6;
    let mut probe = params.clone();
    let (mut diff, mut na, mut nn) = (0.0, 0.0, 0.0);
    let analytic: Vec<f64> = grad.tensors().iter().flat_map(|t| t.iter().copied()).collect();
    let mut k = 0;
    for ti in 0..params.tensors().len() {
        for i in 0..params.tensors()[ti].len() {
            let orig = *probe.tensors_mut()[ti].iter_mut().nth(i).unwrap();
            *probe.tensors_mut()[ti].iter_mut().nth(i).unwrap() = orig + h;
            let up = loss(&probe);
            *probe.tensors_mut()[ti].iter_mut().nth(i).unwrap() = orig - h;
            let down = loss(&probe);
            *probe.tensors_mut()[ti].iter_mut().nth(i).unwrap() = orig;
            let num = (up - down) / (2.0 * h);
            diff += (analytic[k] - num).powi(2);
            na += analytic[k].powi(2);
            nn += num * num;
            k += 1;
        }
    }
    diff.sqrt() / na.sqrt().max(nn.sqrt()).max(1e-300)
}

fn ac7_gradients() -> Outcome {
    let t = Instant::now();
    let cfg = TrainerConfig { hidden: 8, embed: 8, d_k: 8, ..Default::default() };
    let mut rng = rng_from(108);
    let (n, obs_dim, b) = (3, 7, 6);
    let team = Team::new(n, obs_dim, &cfg, CriticKind::Attention, &mut rng).unwrap();
    let mut u = |r, c| Array2::from_shape_fn((r, c), |_| rng.random_range(-1.0..1.0));
    let obs: Tensor = u(b, obs_dim);
    let actions: Vec<Tensor> = (0..n).map(|_| u(b, ACT_DIM)).collect();
    let y: Tensor = u(b, 1);
    let eps: Tensor = u(b, ACT_DIM) * 1.5;
    let m = 1;
    let (critic, proj) = (&team.critics[m], &team.proj);

    let (_, g_critic, g_proj) = critic_loss_grad(critic, proj, &obs, &actions, &y).unwrap();
    let e_critic = fd_relative_error(critic, &g_critic, |c| critic_loss_grad(c, proj, &obs, &actions, &y).unwrap().0);
    let e_proj = fd_relative_error(proj, &g_proj, |p| critic_loss_grad(critic, p, &obs, &actions, &y).unwrap().0);
    let actor = &team.actors[m];
    let (_, g_actor) = actor_loss_grad(actor, critic, proj, &obs, &actions, &eps, 0.2).unwrap();
    let e_actor = fd_relative_error(actor, &g_actor, |a| actor_loss_grad(a, critic, proj, &obs, &actions, &eps, 0.2).unwrap().0);
    let worst = e_critic.max(e_proj).max(e_actor);
    let detail = format!("critic {e_critic:.1e}, attention projections {e_proj:.1e}, actor {e_actor:.1e}");
    if worst >= 1e-4 {
        return Err(detail);
    }
    within(t.elapsed(), 60.0, detail)
}

fn ac8_reward_contract() -> Outcome {
    let cfg = ScenarioConfig {
        n_uavs: 3,
        channel: ChannelParams { irs_rows: 2, irs_cols: 2, ..Default::default() },
        resolution: MetricResolution { quadrature: 2.0 * ONE_DEGREE, sidelobe: ONE_DEGREE },
        ..Default::default()
    };
    let w = RewardWeights::default();
    let base = reset(&cfg, &mut rng_from(109)).unwrap();
    let irs = cfg.irs_position;
    let centre = Position3D::new(50.0, 50.0, 85.0);
    let diag = 100.0 * 2f64.sqrt();
    let step = |positions: [Position3D; 3], acts: [UavAction; 3]| {
        let mut s = base.clone();
        for (u, p) in s.uavs.iter_mut().zip(positions) {
            u.position = p;
        }
        let (next, r) = transition(&cfg, &w, &s, &acts, &mut rng_from(110), Exec::Sequential).unwrap();
        (s, next, r)
    };
    let by_hand = |before: &Position3D, after: &Position3D, r: &swarmsec_core::env::StepResult| {
        let psi = w.eps1 * r.metrics.secrecy_rate.max(0.0) / 1e6
            + w.eps2 * r.metrics.max_sll
            + w.eps3 * r.energies.iter().sum::<f64>() / 1e3;
        let (a, d) = (before.to(&irs), before.to(after));
        let cos = if d.norm() > 0.0 { a.dot(&d) / (a.norm() * d.norm()) } else { 0.0 };
        psi + w.zeta1 * cos - w.zeta2 * after.distance(&centre) / diag
    };
    let go = |dir: f64| UavAction { weight: 0.8, h_speed: 4.0, h_direction: dir, v_speed: 0.5 };

    // satisfied branch
    let (s0, s1, r) = step(
        [Position3D::new(20.0, 20.0, 85.0), Position3D::new(50.0, 60.0, 80.0), Position3D::new(80.0, 30.0, 90.0)],
        [go(0.3), go(2.0), go(4.0)],
    );
    let mut worst = 0.0f64;
    for k in 0..3 {
        worst = worst.max((r.rewards[k] - by_hand(&s0.uavs[k].position, &s1.uavs[k].position, &r)).abs());
    }
    if worst >= 1e-10 {
        return Err(format!("satisfied branch differs from Ψ + b by {worst:.2e}"));
    }

    // boundary violation of agent 0 only
    let (s0, s1, r) = step(
        [Position3D::new(99.5, 50.0, 85.0), Position3D::new(50.0, 60.0, 80.0), Position3D::new(20.0, 30.0, 90.0)],
        [go(0.0), go(2.0), go(4.0)],
    );
    if r.rewards[0] != -w.eta1 {
        return Err(format!("boundary reward {} ≠ −η₁", r.rewards[0]));
    }
    let other = (r.rewards[1] - by_hand(&s0.uavs[1].position, &s1.uavs[1].position, &r)).abs();

    // collision between agents 1 and 2 at 0.3 m, then clearance at 0.6 m
    let hover = UavAction::HOVER;
    let (_, _, r) = step(
        [Position3D::new(20.0, 20.0, 85.0), Position3D::new(50.0, 60.0, 85.0), Position3D::new(50.3, 60.0, 85.0)],
        [hover, hover, hover],
    );
    if r.rewards[1] != -w.eta2 || r.rewards[2] != -w.eta2 {
        return Err(format!("collision rewards {:?}", &r.rewards[1..]));
    }
    let (_, _, r) = step(
        [Position3D::new(20.0, 20.0, 85.0), Position3D::new(50.0, 60.0, 85.0), Position3D::new(50.6, 60.0, 85.0)],
        [hover, hover, hover],
    );
    if r.rewards[1] == -w.eta2 || r.violations.violates(1) {
        return Err("0.6 m separation flagged as collision".into());
    }
    check(
        other < 1e-10,
        format!("Ψ + b residual {worst:.1e}, boundary −η₁ exact, collision −η₂ exact, bystander residual {other:.1e}"),
    )
}

fn desk_scenario(n: usize) -> ScenarioConfig {
    ScenarioConfig {
        n_uavs: n,
        horizon: 50,
        channel: ChannelParams { irs_rows: 4, irs_cols: 4, ..Default::default() },
        resolution: MetricResolution { quadrature: ONE_DEGREE, sidelobe: ONE_DEGREE },
        ..Default::default()
    }
}

fn desk_trainer() -> TrainerConfig {
    TrainerConfig {
        episodes: 300,
        hidden: 64,
        embed: 64,
        d_k: 16,
        batch_size: 128,
        warmup: 500,
        lr: 1e-3,
        ..Default::default()
    }
}

fn desk_train(n: usize, algo: Algorithm) -> TrainOutcome {
    train(&desk_scenario(n), &RewardWeights::default(), &desk_trainer(), algo, DESK_SEED, |_| Ok(())).unwrap()
}

fn tail_mean(logs: &[EpisodeLog], k: usize, f: fn(&EpisodeLog) -> f64) -> f64 {
    let tail = &logs[logs.len().saturating_sub(k)..];
    tail.iter().map(f).sum::<f64>() / tail.len() as f64
}

fn ac9_desk_training(hmca_out: &mut Option<TrainOutcome>) -> Outcome {
    let t = Instant::now();
    let hmca = desk_train(4, Algorithm::Hmca);
    let t_hmca = t.elapsed();
    let random = desk_train(4, Algorithm::Random);
    let plain = desk_train(4, Algorithm::MasacPlain);
    let (hr, rr) = (trailing_mean_reward(&hmca.logs, 50), trailing_mean_reward(&random.logs, 50));
    let (hs, rs) = (tail_mean(&hmca.logs, 50, |l| l.secrecy_mbps), tail_mean(&random.logs, 50, |l| l.secrecy_mbps));
    let pr = trailing_mean_reward(&plain.logs, 50);
    let conv = |o: &TrainOutcome| episodes_to_fraction(&o.logs, 20, 0.9).map_or("never".into(), |e| e.to_string());
    let detail = format!(
        "final-50 reward hmca {hr:.3} vs random {rr:.3} (need ≥ {:.3}), secrecy {hs:.3} vs {rs:.3} Mbit/s; \
         masac_plain reward {pr:.3}; episodes to 90% hmca {} / masac_plain {}; hmca {:.0} s, total {:.0} s",
        rr + 0.5 * rr.abs(),
        conv(&hmca),
        conv(&plain),
        t_hmca.as_secs_f64(),
        t.elapsed().as_secs_f64(),
    );
    *hmca_out = Some(hmca);
    check(hr - rr >= 0.5 * rr.abs() && hs > rs && t.elapsed().as_secs_f64() < 1800.0, detail)
}

fn ac10_scaling(hmca4: Option<TrainOutcome>) -> Outcome {
    let seeds: Vec<u64> = (0..20).map(|i| derive(derive(DESK_SEED, 0x5343414c), i)).collect();
    let mut secrecy = Vec::new();
    let mut energy = Vec::new();
    let mut first = hmca4;
    for n in [4, 6, 8] {
        let out = match first.take() {
            Some(o) if n == 4 => o,
            _ => desk_train(n, Algorithm::Hmca),
        };
        let team = out.team.as_ref().unwrap();
        let (_, s) = evaluate(&desk_scenario(n), &RewardWeights::default(), Controller::Team(team), &seeds, false, Exec::default())
            .unwrap();
        secrecy.push(s.secrecy_mbps.mean);
        energy.push(s.energy_kj.mean);
    }
    let monotone = secrecy.windows(2).all(|w| w[1] >= w[0]);
    let ratio = energy[2] / energy[0];
    check(
        monotone && ratio <= 2.2,
        format!(
            "secrecy {:.3} / {:.3} / {:.3} Mbit/s (non-decreasing: {monotone}), energy {:.2} / {:.2} / {:.2} kJ, E(8)/E(4) = {ratio:.3}",
            secrecy[0], secrecy[1], secrecy[2], energy[0], energy[1], energy[2]
        ),
    )
}

fn ac11_determinism() -> Outcome {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let overrides = |out: &std::path::Path| -> Vec<String> {
        [
            "scenario.n_uavs=3",
            "scenario.horizon=6",
            "scenario.channel.irs_rows=2",
            "scenario.channel.irs_cols=2",
            "scenario.resolution.quadrature=0.05",
            "scenario.resolution.sidelobe=0.015",
            "trainer.episodes=4",
            "trainer.batch_size=8",
            "trainer.warmup=8",
            "trainer.hidden=16",
            "trainer.embed=16",
            "trainer.d_k=8",
            "run.eval_episodes=3",
            "run.seed=11",
        ]
        .iter()
        .map(|s| s.to_string())
        .chain([format!("run.out_dir={}", toml_string(out))])
        .collect()
    };
    for d in &dirs {
        let cfg = parse_config("", &overrides(d.path())).unwrap();
        run(&cfg).map_err(|e| e.to_string())?;
    }
    let files = ["metrics.csv", "eval.csv", "trajectories.csv", "plots/convergence.csv", "checkpoint.bin"];
    for f in files {
        let a = std::fs::read(dirs[0].path().join(f)).map_err(|e| format!("{f}: {e}"))?;
        let b = std::fs::read(dirs[1].path().join(f)).map_err(|e| format!("{f}: {e}"))?;
        if a != b {
            return Err(format!("{f} differs between identical runs"));
        }
    }
    Ok(format!("{} output files byte-identical across two runs", files.len()))
}

fn toml_string(p: &std::path::Path) -> String {
    format!("{:?}", p.display().to_string())
}

fn run_criterion(filter: &[String], id: &str, name: &str, informational: bool, f: impl FnOnce() -> Outcome) -> bool {
    if !filter.is_empty() && !filter.iter().any(|x| x.eq_ignore_ascii_case(id)) {
        return true;
    }
    let t = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(format!("panicked: {msg}"))
    });
    let (tag, detail) = match &outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    let info = if informational { " (informational)" } else { "" };
    println!("{id} {tag}{info} {name}: {detail} [{:.1} s]", t.elapsed().as_secs_f64());
    outcome.is_ok() || informational
}

fn main() {
    // `cargo test -- --list` style probes from tooling
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    // positional arguments select criteria by id, e.g. `-- AC3 AC7`
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut ok = true;
    ok &= run_criterion(&filter, "AC1", "gain normalisation", false, ac1_gain_normalisation);
    ok &= run_criterion(&filter, "AC2", "translation invariance", false, ac2_translation_invariance);
    ok &= run_criterion(&filter, "AC3", "ULA sidelobe oracle", false, ac3_ula_sidelobe);
    ok &= run_criterion(&filter, "AC4", "IRS closed-form optimality", false, ac4_irs_optimality);
    ok &= run_criterion(&filter, "AC5", "channel statistics", false, ac5_channel_statistics);
    ok &= run_criterion(&filter, "AC6", "energy model", false, ac6_energy_model);
    ok &= run_criterion(&filter, "AC7", "gradient correctness", false, ac7_gradients);
    ok &= run_criterion(&filter, "AC8", "reward contract", false, ac8_reward_contract);
    let mut hmca4 = None;
    ok &= run_criterion(&filter, "AC9", "desk-scale training", false, || ac9_desk_training(&mut hmca4));
    ok &= run_criterion(&filter, "AC10", "scaling trend", true, || ac10_scaling(hmca4));
    ok &= run_criterion(&filter, "AC11", "determinism", false, ac11_determinism);
    if !ok {
        std::process::exit(1);
    }
}
