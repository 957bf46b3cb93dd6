//! Mapping between the policy's squashed outputs in `(−1, 1)⁴` and physical
//! UAV actions.

use std::f64::consts::PI;

use swarmsec_core::uav::{MobilityLimits, UavAction};

/// Action dimensions per UAV: weight, horizontal speed, heading, vertical speed.
pub const ACT_DIM: usize = 4;
pub const SPEED: usize = 1;

/// Affine map to physical ranges: weight `[0, 1]`, speed `[0, v_max]`,
/// heading `[0, 2π)`, vertical speed `[−l_max, l_max]`.
pub fn to_physical(a: &[f64], limits: &MobilityLimits) -> UavAction {
    let c = |x: f64| x.clamp(-1.0, 1.0);
    UavAction {
        weight: 0.5 * (c(a[0]) + 1.0),
        h_speed: 0.5 * (c(a[1]) + 1.0) * limits.v_max,
        h_direction: (PI * (c(a[2]) + 1.0)).rem_euclid(2.0 * PI),
        v_speed: c(a[3]) * limits.l_max,
    }
}

/// Inverse of the speed map, used to store a noised speed as a policy output.
pub fn speed_to_normalised(speed: f64, limits: &MobilityLimits) -> f64 {
    (2.0 * speed / limits.v_max - 1.0).clamp(-1.0, 1.0)
}
