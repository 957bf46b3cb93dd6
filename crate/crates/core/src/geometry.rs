//! Coordinate frames, direction angles and ground-node mobility.
//!
//! Angle convention: `theta` is the polar angle measured from the `+z` axis
//! and `phi` the azimuth measured from `+x` towards `+y`, so a unit direction
//! is `(sin θ cos φ, sin θ sin φ, cos θ)`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::seed::{rng_from, SimRng};

/// A point (or displacement) in the 3D Cartesian frame, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3D {
    pub const ORIGIN: Position3D = Position3D::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Vector from `self` to `other`.
    pub fn to(&self, other: &Position3D) -> Position3D {
        Position3D::new(other.x - self.x, other.y - self.y, other.z - self.z)
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(&self, other: &Position3D) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn distance(&self, other: &Position3D) -> f64 {
        self.to(other).norm()
    }

    pub fn translate(&self, by: &Position3D) -> Position3D {
        Position3D::new(self.x + by.x, self.y + by.y, self.z + by.z)
    }

    pub fn scale(&self, s: f64) -> Position3D {
        Position3D::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Polar/azimuth direction. `theta ∈ [0, π]`, `phi ∈ [−π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionAngles {
    pub theta: f64,
    pub phi: f64,
}

impl DirectionAngles {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    /// Unit vector pointing along this direction.
    pub fn unit(&self) -> Position3D {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Position3D::new(st * cp, st * sp, ct)
    }
}

/// Sine of the vertical angle and cosine/sine of the horizontal bearing of a
/// link, as consumed by the IRS steering vectors and the closed-form phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkTrig {
    pub sin_vertical: f64,
    pub cos_horizontal: f64,
    pub sin_horizontal: f64,
}

impl LinkTrig {
    pub const HORIZONTAL_EAST: LinkTrig = LinkTrig {
        sin_vertical: 0.0,
        cos_horizontal: 1.0,
        sin_horizontal: 0.0,
    };
}

/// Direction of `target` as seen from `source`.
pub fn angles_between(source: &Position3D, target: &Position3D) -> Result<DirectionAngles> {
    let v = source.to(target);
    let r = v.norm();
    if !(r > 0.0) {
        return Err(SimError::DegenerateGeometry("coincident points"));
    }
    let theta = (v.z / r).clamp(-1.0, 1.0).acos();
    let phi = v.y.atan2(v.x);
    Ok(DirectionAngles { theta, phi })
}

/// Link trigonometry from `source` to `target`.
///
/// A purely vertical link has no horizontal bearing; its horizontal
/// components are fixed to `(1, 0)`.
pub fn link_trig(source: &Position3D, target: &Position3D) -> Result<LinkTrig> {
    let v = source.to(target);
    let r = v.norm();
    if !(r > 0.0) {
        return Err(SimError::DegenerateGeometry("coincident points"));
    }
    let h = v.x.hypot(v.y);
    let (cos_horizontal, sin_horizontal) = if h > 0.0 {
        (v.x / h, v.y / h)
    } else {
        (1.0, 0.0)
    };
    Ok(LinkTrig {
        sin_vertical: (v.z / r).clamp(-1.0, 1.0),
        cos_horizontal,
        sin_horizontal,
    })
}

/// Axis-aligned rectangle on a horizontal plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn square(min: f64, max: f64) -> Self {
        Self {
            x_min: min,
            x_max: max,
            y_min: min,
            y_max: max,
        }
    }

    pub fn validate(&self, name: &'static str) -> Result<()> {
        let ok = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite())
            && self.x_min < self.x_max
            && self.y_min < self.y_max;
        if ok {
            Ok(())
        } else {
            Err(SimError::invalid(name, "rectangle bounds must be finite with min < max"))
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    pub fn clamp(&self, x: f64, y: f64) -> (f64, f64) {
        (x.clamp(self.x_min, self.x_max), y.clamp(self.y_min, self.y_max))
    }

    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        )
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        (
            rng.random_range(self.x_min..=self.x_max),
            rng.random_range(self.y_min..=self.y_max),
        )
    }
}

/// Parameters of the Gauss-Markov mobility model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WalkerParams {
    /// AR(1) memory in `[0, 1]`; 1 is constant velocity, 0 is memoryless.
    pub memory: f64,
    /// Long-run mean speed, m/s.
    pub mean_speed: f64,
    /// Innovation standard deviation of the speed process, m/s.
    pub noise_std: f64,
    /// Innovation standard deviation of the heading process, rad.
    pub heading_noise_std: f64,
}

impl Default for WalkerParams {
    fn default() -> Self {
        Self {
            memory: 0.8,
            mean_speed: 1.0,
            noise_std: 0.3,
            heading_noise_std: 0.3,
        }
    }
}

impl WalkerParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.memory) {
            return Err(SimError::invalid("walker.memory", "must lie in [0, 1]"));
        }
        if !(self.mean_speed >= 0.0 && self.mean_speed.is_finite()) {
            return Err(SimError::invalid("walker.mean_speed", "must be finite and >= 0"));
        }
        if !(self.noise_std >= 0.0 && self.heading_noise_std >= 0.0) {
            return Err(SimError::invalid("walker.noise_std", "noise must be >= 0"));
        }
        Ok(())
    }
}

/// Ground node (user or eavesdropper) moving by a Gauss-Markov random walk
/// on the plane `z = 0`. Owns its random stream.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussMarkovWalker {
    pub position: Position3D,
    pub speed: f64,
    pub heading: f64,
    pub mean_direction: f64,
    pub params: WalkerParams,
    pub area: Rect,
    rng: SimRng,
}

impl GaussMarkovWalker {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        x: f64,
        y: f64,
        speed: f64,
        heading: f64,
        mean_direction: f64,
        params: WalkerParams,
        area: Rect,
        seed: u64,
    ) -> Self {
        Self {
            position: Position3D::new(x, y, 0.0),
            speed,
            heading,
            mean_direction,
            params,
            area,
            rng: rng_from(seed),
        }
    }

    /// Current velocity `(vx, vy)` in m/s.
    pub fn velocity(&self) -> (f64, f64) {
        let (s, c) = self.heading.sin_cos();
        (self.speed * c, self.speed * s)
    }

    /// Advances the walker by one step of length `dt` seconds.
    pub fn step(&mut self, dt: f64) {
        debug_assert!(dt > 0.0);
        let a = self.params.memory;
        let innovation = (1.0 - a * a).max(0.0).sqrt();
        let n_speed: f64 = self.rng.sample(StandardNormal);
        let n_heading: f64 = self.rng.sample(StandardNormal);

        let speed = a * self.speed
            + (1.0 - a) * self.params.mean_speed
            + innovation * self.params.noise_std * n_speed;
        self.speed = speed.max(0.0);
        self.heading = a * self.heading
            + (1.0 - a) * self.mean_direction
            + innovation * self.params.heading_noise_std * n_heading;

        let (vx, vy) = self.velocity();
        let (x, y) = self
            .area
            .clamp(self.position.x + vx * dt, self.position.y + vy * dt);
        self.position = Position3D::new(x, y, 0.0);
    }
}

/// Functional form of [`GaussMarkovWalker::step`].
pub fn walker_step(w: &GaussMarkovWalker, dt: f64) -> GaussMarkovWalker {
    let mut next = w.clone();
    next.step(dt);
    next
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_two_pi(angle: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let w = angle.rem_euclid(two_pi);
    // rem_euclid can round up to exactly 2π for tiny negative inputs.
    if w >= two_pi {
        0.0
    } else {
        w
    }
}

/// Samples a standard normal deviate; exposed for test oracles.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}
