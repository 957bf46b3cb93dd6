//! Channel realizations for the five links of one timeslot.
//!
//! - VAA → IRS: deterministic LoS, free-space exponent.
//! - IRS → user / eavesdropper: Rician with a planar-array LoS component.
//! - VAA → user / eavesdropper: Rayleigh scaled by the array factor.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::beamforming::{array_factor, VaaConfig};
use crate::error::{Result, SimError};
use crate::geometry::{angles_between, link_trig, LinkTrig, Position3D};
use crate::seed::rng_from;

/// Rician factors at or above this value are treated as pure LoS.
pub const PURE_LOS_RICIAN_K: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelParams {
    /// Channel power gain at the 1 m reference distance (linear).
    pub path_loss_ref: f64,
    /// Path-loss exponent of the VAA → ground links.
    pub alpha_direct: f64,
    /// Path-loss exponent of the IRS → ground links.
    pub alpha_reflect: f64,
    /// Rician factor of the IRS → ground links.
    pub rician_k: f64,
    pub carrier_wavelength: f64,
    pub irs_rows: usize,
    pub irs_cols: usize,
    pub row_spacing: f64,
    pub col_spacing: f64,
}

/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

impl Default for ChannelParams {
    fn default() -> Self {
        let wavelength = SPEED_OF_LIGHT / 2.4e9;
        Self {
            path_loss_ref: 1e-3,
            alpha_direct: 3.6,
            alpha_reflect: 2.7,
            rician_k: 10.0,
            carrier_wavelength: wavelength,
            irs_rows: 6,
            irs_cols: 10,
            row_spacing: wavelength / 2.0,
            col_spacing: wavelength / 2.0,
        }
    }
}

impl ChannelParams {
    pub fn n_elements(&self) -> usize {
        self.irs_rows * self.irs_cols
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.path_loss_ref > 0.0 && self.path_loss_ref.is_finite()) {
            return Err(SimError::invalid("channel.path_loss_ref", "must be > 0"));
        }
        if !(self.alpha_direct >= 2.0 && self.alpha_reflect >= 2.0) {
            return Err(SimError::invalid("channel.alpha", "path-loss exponents must be >= 2"));
        }
        if !(self.rician_k >= 0.0) {
            return Err(SimError::invalid("channel.rician_k", "must be >= 0"));
        }
        if !(self.carrier_wavelength > 0.0 && self.carrier_wavelength.is_finite()) {
            return Err(SimError::invalid("channel.carrier_wavelength", "must be > 0"));
        }
        if self.irs_rows == 0 || self.irs_cols == 0 {
            return Err(SimError::invalid("channel.irs_rows", "surface needs at least one element"));
        }
        if !(self.row_spacing > 0.0 && self.col_spacing > 0.0) {
            return Err(SimError::invalid("channel.spacing", "element spacings must be > 0"));
        }
        Ok(())
    }

    /// `(s_r, s_c)` for the 0-based element index `s`:
    /// `s_r = ⌊s / N_S^R⌋`, `s_c = s mod N_S^R`.
    #[inline]
    pub fn element_index(&self, s: usize) -> (usize, usize) {
        (s / self.irs_rows, s % self.irs_rows)
    }

    /// Per-element phase progression `(2π/λ)(s_r d_r cos_h + s_c d_c sin_h) sin_v`.
    #[inline]
    pub(crate) fn progression(&self, s: usize, trig: &LinkTrig) -> f64 {
        let (sr, sc) = self.element_index(s);
        let k = 2.0 * PI / self.carrier_wavelength;
        k * (sr as f64 * self.row_spacing * trig.cos_horizontal * trig.sin_vertical
            + sc as f64 * self.col_spacing * trig.sin_horizontal * trig.sin_vertical)
    }
}

/// All channel coefficients of one timeslot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSet {
    pub h_ar: Vec<Complex64>,
    pub h_ru: Vec<Complex64>,
    pub h_au: Complex64,
    pub h_re: Vec<Complex64>,
    pub h_ae: Complex64,
}

impl ChannelSet {
    pub fn is_finite(&self) -> bool {
        let fin = |c: &Complex64| c.re.is_finite() && c.im.is_finite();
        self.h_ar.iter().all(fin)
            && self.h_ru.iter().all(fin)
            && self.h_re.iter().all(fin)
            && fin(&self.h_au)
            && fin(&self.h_ae)
    }
}

/// Unit-modulus planar-array LoS response.
pub fn steering_vector(trig: &LinkTrig, p: &ChannelParams) -> Vec<Complex64> {
    (0..p.n_elements())
        .map(|s| Complex64::from_polar(1.0, -p.progression(s, trig)))
        .collect()
}

/// Circularly-symmetric complex Gaussian with unit variance.
pub fn complex_gaussian<R: RngCore + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// VAA → IRS channel: `AF(dir) · √ρ / d · a(trig)`.
pub fn channel_vaa_irs(
    cfg: &VaaConfig,
    vaa_center: &Position3D,
    irs_pos: &Position3D,
    p: &ChannelParams,
) -> Result<Vec<Complex64>> {
    let dir = angles_between(vaa_center, irs_pos)?;
    let trig = link_trig(vaa_center, irs_pos)?;
    let d = vaa_center.distance(irs_pos);
    let scale = array_factor(cfg, &dir) * (p.path_loss_ref.sqrt() / d);
    Ok(steering_vector(&trig, p)
        .into_iter()
        .map(|a| a * scale)
        .collect())
}

/// IRS → ground Rician channel. Draws `N_S` complex normals from `rng`
/// regardless of the Rician factor.
pub fn channel_irs_ground<R: RngCore + ?Sized>(
    irs_pos: &Position3D,
    rx_pos: &Position3D,
    p: &ChannelParams,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let trig = link_trig(irs_pos, rx_pos)?;
    let d = irs_pos.distance(rx_pos);
    let amplitude = (p.path_loss_ref * d.powf(-p.alpha_reflect)).sqrt();
    let (w_los, w_nlos) = if p.rician_k >= PURE_LOS_RICIAN_K {
        (1.0, 0.0)
    } else {
        let b = p.rician_k;
        ((b / (1.0 + b)).sqrt(), (1.0 / (1.0 + b)).sqrt())
    };
    Ok(steering_vector(&trig, p)
        .into_iter()
        .map(|los| {
            let nlos = complex_gaussian(rng);
            (los * w_los + nlos * w_nlos) * amplitude
        })
        .collect())
}

/// VAA → ground Rayleigh channel: `AF(dir) · √(ρ d^−α_d) · h̃`.
pub fn channel_vaa_ground<R: RngCore + ?Sized>(
    cfg: &VaaConfig,
    vaa_center: &Position3D,
    rx_pos: &Position3D,
    p: &ChannelParams,
    rng: &mut R,
) -> Result<Complex64> {
    let dir = angles_between(vaa_center, rx_pos)?;
    let d = vaa_center.distance(rx_pos);
    let amplitude = (p.path_loss_ref * d.powf(-p.alpha_direct)).sqrt();
    let fading = complex_gaussian(rng);
    Ok(array_factor(cfg, &dir) * amplitude * fading)
}

/// Positions needed to realize one slot's channels.
#[derive(Debug, Clone, Copy)]
pub struct LinkGeometry<'a> {
    pub vaa: &'a VaaConfig,
    pub irs: Position3D,
    pub user: Position3D,
    pub eaves: Position3D,
}

/// Realizes all five links from explicit per-receiver sub-seeds. Each
/// receiver's stream draws its Rician vector first, then its Rayleigh scalar.
pub fn realize_channels_seeded(
    geom: &LinkGeometry<'_>,
    p: &ChannelParams,
    user_seed: u64,
    eaves_seed: u64,
) -> Result<ChannelSet> {
    let center = geom.vaa.centroid();
    let h_ar = channel_vaa_irs(geom.vaa, &center, &geom.irs, p)?;

    let mut user_rng = rng_from(user_seed);
    let h_ru = channel_irs_ground(&geom.irs, &geom.user, p, &mut user_rng)?;
    let h_au = channel_vaa_ground(geom.vaa, &center, &geom.user, p, &mut user_rng)?;

    let mut eaves_rng = rng_from(eaves_seed);
    let h_re = channel_irs_ground(&geom.irs, &geom.eaves, p, &mut eaves_rng)?;
    let h_ae = channel_vaa_ground(geom.vaa, &center, &geom.eaves, p, &mut eaves_rng)?;

    Ok(ChannelSet {
        h_ar,
        h_ru,
        h_au,
        h_re,
        h_ae,
    })
}

/// Realizes all five links, drawing the two receiver sub-seeds from `rng`.
pub fn realize_channels<R: RngCore + ?Sized>(
    geom: &LinkGeometry<'_>,
    p: &ChannelParams,
    rng: &mut R,
) -> Result<ChannelSet> {
    let user_seed = rng.next_u64();
    let eaves_seed = rng.next_u64();
    realize_channels_seeded(geom, p, user_seed, eaves_seed)
}
