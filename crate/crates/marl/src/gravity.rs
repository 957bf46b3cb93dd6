//! Gravity exploration: during training the policy's horizontal speed is
//! blended toward a noisy draw around the energy-optimal speed, with a
//! weight on the policy that grows linearly over the episodes.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GravityParams {
    /// Mean of the noise, the energy-optimal speed `v_me`.
    pub v_me: f64,
    /// Standard deviation `σ₀` of the noise.
    pub sigma0: f64,
    pub v_min: f64,
    pub v_max: f64,
}

/// `clip(ζ v + (1 − ζ) v₀, v_min, v_max)` with `ζ = episode / n_episodes`
/// and `v₀ ~ N(v_me, σ₀²)`. One normal draw is consumed on every call.
pub fn gravity_noise<R: Rng + ?Sized>(
    raw_speed: f64,
    episode: usize,
    n_episodes: usize,
    p: &GravityParams,
    rng: &mut R,
) -> f64 {
    let zeta = (episode as f64 / n_episodes.max(1) as f64).clamp(0.0, 1.0);
    let z: f64 = rng.sample(StandardNormal);
    let v0 = p.v_me + p.sigma0 * z;
    (zeta * raw_speed + (1.0 - zeta) * v0).clamp(p.v_min, p.v_max)
}
