//! Per-slot secure-communication metrics.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beamforming::{
    array_factor, max_sidelobe_ratio_with, radiated_power_integral_with, BeamPattern, VaaConfig,
    DEFAULT_QUADRATURE_RESOLUTION, DEFAULT_SLL_RESOLUTION,
};
use crate::channel::{ChannelSet, LinkGeometry};
use crate::error::{Result, SimError};
use crate::exec::Exec;
use crate::geometry::angles_between;
use crate::irs::{reflection_apply, PhaseShiftVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioParams {
    /// Hz.
    pub bandwidth: f64,
    /// Total VAA transmit power, W.
    pub tx_power: f64,
    /// Noise power over the band, W.
    pub noise_power: f64,
}

impl RadioParams {
    /// Noise power from a power spectral density in dBm/Hz.
    pub fn from_noise_psd(bandwidth: f64, tx_power: f64, psd_dbm_per_hz: f64) -> Self {
        let psd_w = 10f64.powf((psd_dbm_per_hz - 30.0) / 10.0);
        Self {
            bandwidth,
            tx_power,
            noise_power: psd_w * bandwidth,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("radio.bandwidth", self.bandwidth),
            ("radio.tx_power", self.tx_power),
            ("radio.noise_power", self.noise_power),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SimError::invalid(name, "must be > 0"));
            }
        }
        Ok(())
    }
}

impl Default for RadioParams {
    fn default() -> Self {
        Self::from_noise_psd(20e6, 0.1, -155.0)
    }
}

/// Grid resolutions used when evaluating a slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricResolution {
    /// Radiated-power quadrature step, rad.
    pub quadrature: f64,
    /// Sidelobe grid step, rad.
    pub sidelobe: f64,
}

impl Default for MetricResolution {
    fn default() -> Self {
        Self {
            quadrature: DEFAULT_QUADRATURE_RESOLUTION,
            sidelobe: DEFAULT_SLL_RESOLUTION,
        }
    }
}

impl MetricResolution {
    pub fn validate(&self) -> Result<()> {
        let one_deg = PI / 180.0;
        if !(self.quadrature > 0.0 && self.quadrature <= PI / 4.0) {
            return Err(SimError::invalid("resolution.quadrature", "must lie in (0, π/4]"));
        }
        if !(self.sidelobe > 0.0 && self.sidelobe <= one_deg * (1.0 + 1e-12)) {
            return Err(SimError::invalid("resolution.sidelobe", "must lie in (0, 1°]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotMetrics {
    pub gain_user: f64,
    pub gain_eve: f64,
    /// bit/s
    pub rate_user: f64,
    /// bit/s
    pub rate_eve: f64,
    /// bit/s, unclipped (may be negative).
    pub secrecy_rate: f64,
    pub max_sll: f64,
}

/// `4π |cascaded + direct|² / integral · η`.
pub fn combined_gain_with_integral(
    ch_reflect: &[Complex64],
    phases: &PhaseShiftVector,
    ch_out: &[Complex64],
    ch_direct: Complex64,
    integral: f64,
    efficiency: f64,
) -> Result<f64> {
    if !(integral > 0.0) {
        return Err(SimError::DegenerateArray("zero radiated power"));
    }
    let total = reflection_apply(phases, ch_reflect, ch_out)? + ch_direct;
    Ok(4.0 * PI * total.norm_sqr() / integral * efficiency)
}

/// Combined gain with the radiated-power integral of `cfg` at `resolution`.
pub fn combined_gain(
    ch_reflect: &[Complex64],
    phases: &PhaseShiftVector,
    ch_out: &[Complex64],
    ch_direct: Complex64,
    cfg: &VaaConfig,
    resolution: f64,
) -> Result<f64> {
    let integral = radiated_power_integral_with(cfg, resolution, Exec::default());
    combined_gain_with_integral(ch_reflect, phases, ch_out, ch_direct, integral, cfg.efficiency)
}

/// `B log2(1 + P_t G / σ²)`.
pub fn shannon_rate(gain: f64, rp: &RadioParams) -> f64 {
    rp.bandwidth * (rp.tx_power * gain / rp.noise_power).ln_1p() / std::f64::consts::LN_2
}

pub fn secrecy_rate(rate_user: f64, rate_eve: f64) -> f64 {
    rate_user - rate_eve
}

/// Evaluates gains, rates, secrecy rate and maximum SLL for one slot. The
/// radiated-power integral is computed once and shared by both gains; the
/// sidelobe mainlobe points from the VAA centroid to the IRS.
pub fn slot_metrics(
    geom: &LinkGeometry<'_>,
    channels: &ChannelSet,
    phases: &PhaseShiftVector,
    rp: &RadioParams,
    res: &MetricResolution,
    exec: Exec,
) -> Result<SlotMetrics> {
    let cfg = geom.vaa;
    let mainlobe = angles_between(&cfg.centroid(), &geom.irs)?;
    // one pattern evaluation serves both when the grids coincide
    let (integral, max_sll) = if res.quadrature == res.sidelobe {
        let peak = array_factor(cfg, &mainlobe).norm();
        if !(peak > 0.0) {
            return Err(SimError::DegenerateArray("zero mainlobe magnitude"));
        }
        let pattern = BeamPattern::sample(cfg, res.sidelobe, exec);
        (pattern.power_integral(cfg.pattern), pattern.sidelobe_ratio(&mainlobe, peak))
    } else {
        (
            radiated_power_integral_with(cfg, res.quadrature, exec),
            max_sidelobe_ratio_with(cfg, &mainlobe, res.sidelobe, exec)?,
        )
    };
    let gain_user = combined_gain_with_integral(
        &channels.h_ar,
        phases,
        &channels.h_ru,
        channels.h_au,
        integral,
        cfg.efficiency,
    )?;
    let gain_eve = combined_gain_with_integral(
        &channels.h_ar,
        phases,
        &channels.h_re,
        channels.h_ae,
        integral,
        cfg.efficiency,
    )?;
    let rate_user = shannon_rate(gain_user, rp);
    let rate_eve = shannon_rate(gain_eve, rp);
    Ok(SlotMetrics {
        gain_user,
        gain_eve,
        rate_user,
        rate_eve,
        secrecy_rate: secrecy_rate(rate_user, rate_eve),
        max_sll,
    })
}
