//! UAV kinematics, rotary-wing propulsion power and per-slot flight energy.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::geometry::Position3D;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UavState {
    pub position: Position3D,
    /// Excitation current weight in `[0, 1]`.
    pub weight: f64,
    /// Average 3D speed over the previous slot, m/s.
    pub avg_speed_prev: f64,
}

impl UavState {
    pub fn at(position: Position3D) -> Self {
        Self {
            position,
            weight: 1.0,
            avg_speed_prev: 0.0,
        }
    }
}

/// Per-slot command of one UAV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UavAction {
    pub weight: f64,
    /// Horizontal speed, m/s, in `[0, v_max]`.
    pub h_speed: f64,
    /// Horizontal heading, rad, in `[0, 2π)`.
    pub h_direction: f64,
    /// Vertical speed, m/s, in `[−l_max, l_max]`.
    pub v_speed: f64,
}

impl UavAction {
    pub const HOVER: UavAction = UavAction {
        weight: 1.0,
        h_speed: 0.0,
        h_direction: 0.0,
        v_speed: 0.0,
    };
}

/// Speed limits of the airframe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MobilityLimits {
    pub v_max: f64,
    pub v_min: f64,
    pub l_max: f64,
}

impl Default for MobilityLimits {
    fn default() -> Self {
        Self {
            v_max: 15.0,
            v_min: 0.0,
            l_max: 3.0,
        }
    }
}

impl MobilityLimits {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_max > 0.0 && self.v_max.is_finite()) {
            return Err(SimError::invalid("limits.v_max", "must be > 0"));
        }
        if !(self.v_min >= 0.0 && self.v_min <= self.v_max) {
            return Err(SimError::invalid("limits.v_min", "must lie in [0, v_max]"));
        }
        if !(self.l_max >= 0.0 && self.l_max.is_finite()) {
            return Err(SimError::invalid("limits.l_max", "must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropulsionParams {
    /// Blade profile power in hover, W.
    pub blade_power: f64,
    /// Induced power in hover, W.
    pub induced_power: f64,
    /// Rotor blade tip speed, m/s.
    pub tip_speed: f64,
    /// Mean rotor induced velocity in hover, m/s.
    pub hover_induced_speed: f64,
    pub fuselage_drag_ratio: f64,
    pub rotor_solidity: f64,
    /// kg/m³
    pub air_density: f64,
    /// m²
    pub rotor_disc_area: f64,
    /// kg
    pub mass: f64,
    /// m/s²
    pub gravity: f64,
}

impl Default for PropulsionParams {
    fn default() -> Self {
        Self {
            blade_power: 79.86,
            induced_power: 88.63,
            tip_speed: 120.0,
            hover_induced_speed: 4.03,
            fuselage_drag_ratio: 0.6,
            rotor_solidity: 0.05,
            air_density: 1.225,
            rotor_disc_area: 0.503,
            mass: 2.0,
            gravity: 9.8,
        }
    }
}

impl PropulsionParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("propulsion.blade_power", self.blade_power),
            ("propulsion.induced_power", self.induced_power),
            ("propulsion.tip_speed", self.tip_speed),
            ("propulsion.hover_induced_speed", self.hover_induced_speed),
            ("propulsion.fuselage_drag_ratio", self.fuselage_drag_ratio),
            ("propulsion.rotor_solidity", self.rotor_solidity),
            ("propulsion.air_density", self.air_density),
            ("propulsion.rotor_disc_area", self.rotor_disc_area),
            ("propulsion.mass", self.mass),
            ("propulsion.gravity", self.gravity),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SimError::invalid(name, "must be > 0"));
            }
        }
        Ok(())
    }

    /// `½ d₀ ρ s A`, the coefficient of the cubic parasite term.
    pub fn parasite_coefficient(&self) -> f64 {
        0.5 * self.fuselage_drag_ratio * self.air_density * self.rotor_solidity * self.rotor_disc_area
    }
}

/// Moves a UAV for one slot. Returns the new state (weight taken from the
/// action, average speed from the flown distance) and the 3D displacement
/// length. No boundary handling.
pub fn advance(state: &UavState, act: &UavAction, dt: f64) -> (UavState, f64) {
    let (s, c) = act.h_direction.sin_cos();
    let delta = Position3D::new(act.h_speed * c * dt, act.h_speed * s * dt, act.v_speed * dt);
    let displacement = delta.norm();
    let next = UavState {
        position: state.position.translate(&delta),
        weight: act.weight,
        avg_speed_prev: displacement / dt,
    };
    (next, displacement)
}

/// Rotary-wing propulsion power at forward speed `speed`.
pub fn propulsion_power(speed: f64, p: &PropulsionParams) -> f64 {
    let v2 = speed * speed;
    let v0_2 = p.hover_induced_speed * p.hover_induced_speed;
    let blade = p.blade_power * (1.0 + 3.0 * v2 / (p.tip_speed * p.tip_speed));
    let r = v2 / (2.0 * v0_2);
    // √(1 + r²) − r, rewritten as 1 / (√(1 + r²) + r) to avoid cancellation
    let induced = p.induced_power * (1.0 / ((1.0 + r * r).sqrt() + r)).sqrt();
    let parasite = p.parasite_coefficient() * v2 * speed;
    blade + induced + parasite
}

/// Speed in `[0, v_max]` minimising [`propulsion_power`], to within 1e-6 m/s.
///
/// A coarse scan brackets the global minimum, then golden-section search
/// refines it.
pub fn energy_optimal_speed(p: &PropulsionParams, v_max: f64) -> f64 {
    let f = |v: f64| propulsion_power(v, p);
    let n: usize = 400;
    let h = v_max / n as f64;
    let best = (0..=n)
        .min_by(|&a, &b| f(a as f64 * h).total_cmp(&f(b as f64 * h)))
        .unwrap_or(0);
    let mut lo = (best.saturating_sub(1)) as f64 * h;
    let mut hi = ((best + 1).min(n)) as f64 * h;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-7 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    // endpoints are candidates too (monotone objectives)
    let mid = 0.5 * (lo + hi);
    [mid, 0.0, v_max]
        .into_iter()
        .min_by(|a, b| f(*a).total_cmp(&f(*b)))
        .unwrap_or(mid)
}

/// Energy of one slot: propulsion at the commanded horizontal speed plus the
/// kinetic and potential energy changes. Kept signed.
pub fn slot_energy(
    before: &UavState,
    after: &UavState,
    act: &UavAction,
    p: &PropulsionParams,
    dt: f64,
) -> f64 {
    propulsion_power(act.h_speed, p) * dt
        + kinetic_term(before, after, p)
        + gravitational_term(before, after, p)
}

pub fn kinetic_term(before: &UavState, after: &UavState, p: &PropulsionParams) -> f64 {
    0.5 * p.mass * (after.avg_speed_prev.powi(2) - before.avg_speed_prev.powi(2))
}

pub fn gravitational_term(before: &UavState, after: &UavState, p: &PropulsionParams) -> f64 {
    p.mass * p.gravity * (after.position.z - before.position.z)
}
