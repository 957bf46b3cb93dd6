//! Virtual antenna array mathematics.
//!
//! Each UAV is one isotropic element with a real excitation weight. The array
//! factor is evaluated with positions taken relative to the swarm centroid,
//! which only changes the global phase of the pattern.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::exec::Exec;
use crate::geometry::{DirectionAngles, Position3D};

/// 1° in radians.
pub const ONE_DEGREE: f64 = PI / 180.0;
/// Default quadrature step for the radiated-power integral.
pub const DEFAULT_QUADRATURE_RESOLUTION: f64 = ONE_DEGREE;
/// Default grid step for the sidelobe search.
pub const DEFAULT_SLL_RESOLUTION: f64 = 0.5 * ONE_DEGREE;

/// Far-field element pattern `w(θ, φ)`.
#[derive(Debug, Clone, Copy)]
pub enum ElementPattern {
    Isotropic,
    Custom(fn(theta: f64, phi: f64) -> f64),
}

impl PartialEq for ElementPattern {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::Isotropic, Self::Isotropic) => true,
            (Self::Custom(a), Self::Custom(b)) => std::ptr::fn_addr_eq(*a, *b),
            _ => false,
        }
    }
}

impl ElementPattern {
    #[inline]
    pub fn eval(&self, theta: f64, phi: f64) -> f64 {
        match self {
            ElementPattern::Isotropic => 1.0,
            ElementPattern::Custom(f) => f(theta, phi),
        }
    }
}

/// Geometry and excitation of the virtual antenna array.
#[derive(Debug, Clone, PartialEq)]
pub struct VaaConfig {
    pub positions: Vec<Position3D>,
    pub weights: Vec<f64>,
    pub wavelength: f64,
    pub efficiency: f64,
    pub pattern: ElementPattern,
}

impl VaaConfig {
    pub fn new(
        positions: Vec<Position3D>,
        weights: Vec<f64>,
        wavelength: f64,
        efficiency: f64,
    ) -> Result<Self> {
        let cfg = Self {
            positions,
            weights,
            wavelength,
            efficiency,
            pattern: ElementPattern::Isotropic,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_pattern(mut self, pattern: ElementPattern) -> Self {
        self.pattern = pattern;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.positions.is_empty() {
            return Err(SimError::Empty("array has no elements"));
        }
        if self.positions.len() != self.weights.len() {
            return Err(SimError::LengthMismatch {
                expected: self.positions.len(),
                got: self.weights.len(),
            });
        }
        if !self.positions.iter().all(Position3D::is_finite) {
            return Err(SimError::invalid("positions", "must be finite"));
        }
        if !self.weights.iter().all(|w| (0.0..=1.0).contains(w)) {
            return Err(SimError::invalid("weights", "excitation weights must lie in [0, 1]"));
        }
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return Err(SimError::invalid("wavelength", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(SimError::invalid("efficiency", "must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn centroid(&self) -> Position3D {
        // validated configs are non-empty
        swarm_centroid(&self.positions).unwrap_or(Position3D::ORIGIN)
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub(crate) fn evaluator(&self) -> ArrayEvaluator {
        ArrayEvaluator::new(self)
    }
}

/// Arithmetic mean of a set of positions.
pub fn swarm_centroid(positions: &[Position3D]) -> Result<Position3D> {
    if positions.is_empty() {
        return Err(SimError::Empty("centroid of an empty swarm"));
    }
    let n = positions.len() as f64;
    let sum = positions
        .iter()
        .fold(Position3D::ORIGIN, |acc, p| acc.translate(p));
    Ok(sum.scale(1.0 / n))
}

/// Array factor with wavenumber-scaled, centroid-relative coordinates cached.
#[derive(Debug, Clone)]
pub(crate) struct ArrayEvaluator {
    // (k·x, k·y, k·z, I) per element
    elements: Vec<[f64; 4]>,
    pattern: ElementPattern,
}

impl ArrayEvaluator {
    fn new(cfg: &VaaConfig) -> Self {
        let k = 2.0 * PI / cfg.wavelength;
        let c = cfg.centroid();
        let elements = cfg
            .positions
            .iter()
            .zip(&cfg.weights)
            .filter(|(_, &w)| w != 0.0)
            .map(|(p, &w)| {
                let r = c.to(p);
                [k * r.x, k * r.y, k * r.z, w]
            })
            .collect();
        Self {
            elements,
            pattern: cfg.pattern,
        }
    }

    /// AF for the unit direction `(ux, uy, uz)`.
    #[inline]
    fn af_unit(&self, ux: f64, uy: f64, uz: f64) -> Complex64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for e in &self.elements {
            let (s, c) = (e[0] * ux + e[1] * uy + e[2] * uz).sin_cos();
            re += e[3] * c;
            im += e[3] * s;
        }
        Complex64::new(re, im)
    }

    #[inline]
    pub(crate) fn af(&self, dir: &DirectionAngles) -> Complex64 {
        let u = dir.unit();
        self.af_unit(u.x, u.y, u.z)
    }

    /// `∫∫ |AF|² w² sin θ dθ dφ` by the trapezoidal rule on the inclusive
    /// node grid of [`BeamPattern`]. The pole rows carry zero weight.
    pub(crate) fn power_integral(&self, resolution: f64, exec: Exec) -> f64 {
        if self.elements.is_empty() {
            return 0.0;
        }
        let grid = Grid::new(resolution);
        let trig_phi = grid.trig_phi();
        let rows = exec.map(grid.n_theta.saturating_sub(1), |r| {
            let i = r + 1;
            let theta = grid.theta(i);
            let (st, ct) = theta.sin_cos();
            let mut row = 0.0;
            for (j, &(cp, sp)) in trig_phi.iter().enumerate().take(grid.n_phi) {
                let w = self.pattern.eval(theta, grid.phi(j));
                row += self.af_unit(st * cp, st * sp, ct).norm_sqr() * w * w;
            }
            row * st
        });
        grid.weight(rows.iter().sum::<f64>())
    }
}

/// Inclusive `(θ, φ)` node grid shared by the quadrature and the sidelobe
/// search.
#[derive(Debug, Clone, Copy)]
struct Grid {
    n_theta: usize,
    n_phi: usize,
    d_theta: f64,
    d_phi: f64,
}

impl Grid {
    fn new(resolution: f64) -> Self {
        let n_theta = steps(PI, resolution);
        let n_phi = steps(2.0 * PI, resolution);
        Self {
            n_theta,
            n_phi,
            d_theta: PI / n_theta as f64,
            d_phi: 2.0 * PI / n_phi as f64,
        }
    }

    fn theta(&self, i: usize) -> f64 {
        i as f64 * self.d_theta
    }

    fn phi(&self, j: usize) -> f64 {
        -PI + j as f64 * self.d_phi
    }

    fn trig_phi(&self) -> Vec<(f64, f64)> {
        (0..=self.n_phi)
            .map(|j| {
                let (s, c) = self.phi(j).sin_cos();
                (c, s)
            })
            .collect()
    }

    fn weight(&self, sum: f64) -> f64 {
        sum * self.d_theta * self.d_phi
    }
}

fn steps(span: f64, resolution: f64) -> usize {
    ((span / resolution).round() as usize).max(1)
}

/// Complex array factor `Σ I_m exp(j k ⟨r_m − c, u(θ, φ)⟩)`.
pub fn array_factor(cfg: &VaaConfig, dir: &DirectionAngles) -> Complex64 {
    cfg.evaluator().af(dir)
}

/// Total radiated power integral used as the gain normaliser.
pub fn radiated_power_integral(cfg: &VaaConfig, resolution: f64) -> f64 {
    radiated_power_integral_with(cfg, resolution, Exec::default())
}

pub fn radiated_power_integral_with(cfg: &VaaConfig, resolution: f64, exec: Exec) -> f64 {
    cfg.evaluator().power_integral(resolution, exec)
}

/// Directive gain `4π |AF|² w² / ∫|AF|² w² dΩ · η` with a 1° quadrature.
pub fn directive_gain(cfg: &VaaConfig, dir: &DirectionAngles) -> Result<f64> {
    let integral = radiated_power_integral(cfg, DEFAULT_QUADRATURE_RESOLUTION);
    directive_gain_with_integral(cfg, dir, integral)
}

/// Directive gain with a precomputed radiated-power integral.
pub fn directive_gain_with_integral(
    cfg: &VaaConfig,
    dir: &DirectionAngles,
    integral: f64,
) -> Result<f64> {
    if !(integral > 0.0) {
        return Err(SimError::DegenerateArray("zero radiated power"));
    }
    let af = array_factor(cfg, dir).norm_sqr();
    let w = cfg.pattern.eval(dir.theta, dir.phi);
    Ok(4.0 * PI * af * w * w / integral * cfg.efficiency)
}

/// `|AF|` sampled on an inclusive `(θ, φ)` grid: `θ_i = iΔ` for
/// `i = 0..=n_θ` and `φ_j = −π + jΔ` for `j = 0..=n_φ`.
#[derive(Debug, Clone)]
pub struct BeamPattern {
    pub n_theta: usize,
    pub n_phi: usize,
    pub d_theta: f64,
    pub d_phi: f64,
    /// Row-major `(n_theta + 1) × (n_phi + 1)` magnitudes.
    pub magnitude: Vec<f64>,
}

impl BeamPattern {
    pub fn sample(cfg: &VaaConfig, resolution: f64, exec: Exec) -> Self {
        let eval = cfg.evaluator();
        let grid = Grid::new(resolution);
        let trig_phi = grid.trig_phi();
        let rows = exec.map(grid.n_theta + 1, |i| {
            let (st, ct) = grid.theta(i).sin_cos();
            trig_phi
                .iter()
                .map(|&(cp, sp)| eval.af_unit(st * cp, st * sp, ct).norm())
                .collect::<Vec<f64>>()
        });
        Self {
            n_theta: grid.n_theta,
            n_phi: grid.n_phi,
            d_theta: grid.d_theta,
            d_phi: grid.d_phi,
            magnitude: rows.concat(),
        }
    }

    /// Radiated-power integral from the sampled magnitudes, with the same
    /// rule as [`radiated_power_integral`] at this resolution.
    pub fn power_integral(&self, pattern: ElementPattern) -> f64 {
        let grid = Grid {
            n_theta: self.n_theta,
            n_phi: self.n_phi,
            d_theta: self.d_theta,
            d_phi: self.d_phi,
        };
        let rows = (1..self.n_theta).map(|i| {
            let theta = self.theta(i);
            let row: f64 = (0..self.n_phi)
                .map(|j| {
                    let w = pattern.eval(theta, self.phi(j));
                    let m = self.at(i, j);
                    m * m * w * w
                })
                .sum();
            row * theta.sin()
        });
        grid.weight(rows.sum::<f64>())
    }

    /// Largest magnitude outside the mainlobe containing `dir`, divided by
    /// `reference`; 1 when the mainlobe covers the grid.
    pub fn sidelobe_ratio(&self, dir: &DirectionAngles, reference: f64) -> f64 {
        let mask = self.mainlobe(self.nearest_cell(dir));
        let np = self.n_phi;
        let mut best: Option<f64> = None;
        for i in 0..=self.n_theta {
            for j in 0..np {
                if !mask[i * np + j] {
                    let m = self.at(i, j);
                    best = Some(best.map_or(m, |b: f64| b.max(m)));
                }
            }
        }
        best.map_or(1.0, |b| b / reference)
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.magnitude[i * (self.n_phi + 1) + j]
    }

    pub fn theta(&self, i: usize) -> f64 {
        i as f64 * self.d_theta
    }

    pub fn phi(&self, j: usize) -> f64 {
        -PI + j as f64 * self.d_phi
    }

    /// Grid cell nearest to `dir`, with the azimuth column folded into
    /// `0..n_phi` (column `n_phi` aliases column 0).
    pub fn nearest_cell(&self, dir: &DirectionAngles) -> (usize, usize) {
        let i = ((dir.theta / self.d_theta).round() as usize).min(self.n_theta);
        let j = ((dir.phi + PI) / self.d_phi).round() as usize % self.n_phi;
        (i, j)
    }

    fn neighbours(&self, i: usize, j: usize, out: &mut Vec<(usize, usize)>) {
        let (nt, np) = (self.n_theta, self.n_phi);
        out.clear();
        out.push((i, (j + 1) % np));
        out.push((i, (j + np - 1) % np));
        if i > 0 {
            out.push((i - 1, j));
        }
        if i < nt {
            out.push((i + 1, j));
        }
        if i == 0 || i == nt {
            out.extend((0..np).map(|jj| (i, jj)));
        }
    }

    /// Flood fill from the cells already set in `mask`, entering a neighbour
    /// when `accept(from, to)` holds for the two magnitudes.
    fn flood(&self, mask: &mut [bool], accept: impl Fn(f64, f64) -> bool) {
        let np = self.n_phi;
        let mut stack: Vec<(usize, usize)> = (0..mask.len())
            .filter(|&k| mask[k])
            .map(|k| (k / np, k % np))
            .collect();
        let mut nb = Vec::new();
        while let Some((i, j)) = stack.pop() {
            let here = self.at(i, j);
            self.neighbours(i, j, &mut nb);
            for &(a, b) in &nb {
                let k = a * np + b;
                if !mask[k] && accept(here, self.at(a, b)) {
                    mask[k] = true;
                    stack.push((a, b));
                }
            }
        }
    }

    /// Connected region around `start` where the magnitude is at least
    /// `threshold`. The azimuth wraps around and each pole row is a single
    /// point. Returned mask is indexed `i * n_phi + j` with `j < n_phi`.
    pub fn connected_region(&self, start: (usize, usize), threshold: f64) -> Vec<bool> {
        let mut mask = vec![false; (self.n_theta + 1) * self.n_phi];
        mask[start.0 * self.n_phi + start.1] = true;
        self.flood(&mut mask, |_, to| to >= threshold);
        mask
    }

    /// Grows `mask` down its non-increasing slopes, so a lobe region ends at
    /// the surrounding nulls.
    pub fn extend_downhill(&self, mask: &mut [bool]) {
        self.flood(mask, |from, to| to <= from);
    }

    /// Follows the steepest ascent from `start` to a local maximum.
    pub fn climb(&self, start: (usize, usize)) -> (usize, usize) {
        let mut cur = start;
        let mut nb = Vec::new();
        loop {
            self.neighbours(cur.0, cur.1, &mut nb);
            let here = self.at(cur.0, cur.1);
            let best = nb
                .iter()
                .copied()
                .filter(|&(i, j)| self.at(i, j) > here)
                .max_by(|a, b| self.at(a.0, a.1).total_cmp(&self.at(b.0, b.1)));
            match best {
                Some(next) => cur = next,
                None => return cur,
            }
        }
    }

    /// Mainlobe mask of the lobe containing `start`: the half-power region
    /// around the lobe's peak, extended down its slopes to the nulls.
    pub fn mainlobe(&self, start: (usize, usize)) -> Vec<bool> {
        let peak = self.climb(start);
        let threshold = self.at(peak.0, peak.1) * std::f64::consts::FRAC_1_SQRT_2;
        let mut mask = self.connected_region(peak, threshold);
        self.extend_downhill(&mut mask);
        mask
    }
}

/// Maximum sidelobe level as a magnitude ratio.
///
/// The mainlobe is the lobe containing the grid cell nearest `mainlobe_dir`:
/// starting from that cell the pattern is climbed to the lobe peak, the
/// connected half-power region around the peak is taken and extended down
/// its slopes to the surrounding nulls. The result is the largest `|AF|`
/// outside that region divided by `|AF(mainlobe_dir)|`. When the mainlobe
/// covers the whole sphere (flat pattern) the ratio is 1.
pub fn max_sidelobe_ratio(
    cfg: &VaaConfig,
    mainlobe_dir: &DirectionAngles,
    resolution: f64,
) -> Result<f64> {
    max_sidelobe_ratio_with(cfg, mainlobe_dir, resolution, Exec::default())
}

pub fn max_sidelobe_ratio_with(
    cfg: &VaaConfig,
    mainlobe_dir: &DirectionAngles,
    resolution: f64,
    exec: Exec,
) -> Result<f64> {
    let peak = array_factor(cfg, mainlobe_dir).norm();
    if !(peak > 0.0) {
        return Err(SimError::DegenerateArray("zero mainlobe magnitude"));
    }
    Ok(BeamPattern::sample(cfg, resolution, exec).sidelobe_ratio(mainlobe_dir, peak))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ula(n: usize, spacing_wl: f64, weight: f64) -> VaaConfig {
        let positions = (0..n)
            .map(|m| Position3D::new(m as f64 * spacing_wl, 0.0, 0.0))
            .collect();
        VaaConfig::new(positions, vec![weight; n], 1.0, 1.0).unwrap()
    }

    fn single(eta: f64) -> VaaConfig {
        VaaConfig::new(vec![Position3D::new(3.0, -2.0, 80.0)], vec![1.0], 0.125, eta).unwrap()
    }

    #[test]
    fn single_element_af_is_one() {
        let cfg = single(1.0);
        for &(t, p) in &[(0.0, 0.0), (1.0, 2.0), (PI, -PI)] {
            let af = array_factor(&cfg, &DirectionAngles::new(t, p));
            assert_eq!(af, Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn coincident_elements_sum_weights() {
        let p = Position3D::new(1.0, 2.0, 3.0);
        let cfg = VaaConfig::new(vec![p; 3], vec![0.2, 0.5, 0.9], 0.5, 1.0).unwrap();
        let af = array_factor(&cfg, &DirectionAngles::new(0.7, -1.1));
        assert_relative_eq!(af.re, 1.6, epsilon = 1e-12);
        assert!(af.im.abs() < 1e-12);
    }

    #[test]
    fn broadside_ula_is_coherent() {
        let cfg = ula(8, 0.5, 1.0);
        let af = array_factor(&cfg, &DirectionAngles::new(PI / 2.0, PI / 2.0));
        assert_relative_eq!(af.norm(), 8.0, epsilon = 1e-12);
    }

    #[test]
    fn isotropic_integral_is_four_pi() {
        let i = radiated_power_integral(&single(1.0), ONE_DEGREE);
        assert_relative_eq!(i, 4.0 * PI, max_relative = 1e-3);
    }

    #[test]
    fn zero_weights_radiate_nothing() {
        let cfg = VaaConfig::new(
            vec![Position3D::ORIGIN, Position3D::new(1.0, 0.0, 0.0)],
            vec![0.0, 0.0],
            1.0,
            1.0,
        )
        .unwrap();
        assert_eq!(radiated_power_integral(&cfg, ONE_DEGREE), 0.0);
        assert!(matches!(
            directive_gain(&cfg, &DirectionAngles::new(1.0, 1.0)),
            Err(SimError::DegenerateArray(_))
        ));
        assert!(max_sidelobe_ratio(&cfg, &DirectionAngles::new(1.0, 1.0), ONE_DEGREE).is_err());
    }

    #[test]
    fn two_element_integral_converges_under_refinement() {
        let cfg = ula(2, 0.5, 1.0);
        let coarse = radiated_power_integral(&cfg, ONE_DEGREE);
        let fine = radiated_power_integral(&cfg, ONE_DEGREE / 10.0);
        assert_relative_eq!(coarse, fine, max_relative = 1e-3);
        // closed form for isotropic pairs: 4π (Σ I² + 2 I₁I₂ sinc(k d))
        let kd = PI;
        let exact = 4.0 * PI * (2.0 + 2.0 * kd.sin() / kd);
        assert_relative_eq!(fine, exact, max_relative = 1e-4);
    }

    #[test]
    fn gain_normalisation_and_efficiency() {
        for eta in [1.0, 0.5] {
            let cfg = single(eta);
            for &(t, p) in &[(0.1, 0.0), (1.3, 2.0), (2.9, -3.0)] {
                let g = directive_gain(&cfg, &DirectionAngles::new(t, p)).unwrap();
                assert_relative_eq!(g, eta, max_relative = 1e-3);
            }
        }
    }

    #[test]
    fn eight_element_mainlobe_gain() {
        let cfg = ula(8, 0.5, 1.0);
        let fine = radiated_power_integral(&cfg, ONE_DEGREE / 8.0);
        let dir = DirectionAngles::new(PI / 2.0, PI / 2.0);
        let g = directive_gain(&cfg, &dir).unwrap();
        let g_fine = directive_gain_with_integral(&cfg, &dir, fine).unwrap();
        assert_relative_eq!(g, g_fine, max_relative = 1e-3);
        assert!((g - 8.0).abs() / 8.0 < 0.05, "gain {g}");
    }

    #[test]
    fn flat_pattern_has_unit_sidelobe_ratio() {
        let r = max_sidelobe_ratio(&single(1.0), &DirectionAngles::new(1.0, 0.3), ONE_DEGREE).unwrap();
        assert_eq!(r, 1.0);
    }

    /// Brute-force ULA sidelobe search over the angle to the array axis.
    fn ula_sidelobe_oracle(n: usize) -> f64 {
        let steps = 1800;
        let mag: Vec<f64> = (0..=steps)
            .map(|i| {
                let gamma = (i as f64 * 0.1).to_radians();
                let psi = PI * gamma.cos();
                let (num, den) = ((n as f64 * psi / 2.0).sin(), (psi / 2.0).sin());
                if den.abs() < 1e-12 { 1.0 } else { (num / (n as f64 * den)).abs() }
            })
            .collect();
        // walk out of the broadside peak until the pattern turns upward
        let centre = steps / 2;
        let mut lo = centre;
        while lo > 0 && mag[lo - 1] <= mag[lo] {
            lo -= 1;
        }
        let mut hi = centre;
        while hi < steps && mag[hi + 1] <= mag[hi] {
            hi += 1;
        }
        mag.iter()
            .enumerate()
            .filter(|(i, _)| *i < lo || *i > hi)
            .map(|(_, m)| *m)
            .fold(0.0, f64::max)
    }

    #[test]
    fn ula_sidelobe_matches_oracle() {
        let cfg = ula(8, 0.5, 1.0);
        let r = max_sidelobe_ratio(&cfg, &DirectionAngles::new(PI / 2.0, PI / 2.0), DEFAULT_SLL_RESOLUTION)
            .unwrap();
        let oracle = ula_sidelobe_oracle(8);
        let db = 20.0 * (r / oracle).log10();
        assert!(db.abs() < 0.3, "ratio {r} oracle {oracle}");
        assert!((20.0 * oracle.log10() + 12.8).abs() < 0.2, "oracle {oracle}");
    }

    #[test]
    fn off_peak_direction_finds_the_same_lobe() {
        let cfg = ula(8, 0.5, 1.0);
        let pattern = BeamPattern::sample(&cfg, ONE_DEGREE, Exec::Sequential);
        let at_peak = pattern.mainlobe(pattern.nearest_cell(&DirectionAngles::new(PI / 2.0, PI / 2.0)));
        let on_slope = pattern.mainlobe(pattern.nearest_cell(&DirectionAngles::new(PI / 2.0, PI / 2.0 - 0.1)));
        assert_eq!(at_peak, on_slope);
        assert!(at_peak.iter().any(|m| !m));
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let cfg = ula(5, 0.37, 0.8);
        let a = radiated_power_integral_with(&cfg, ONE_DEGREE, Exec::Sequential);
        let b = radiated_power_integral_with(&cfg, ONE_DEGREE, Exec::Parallel);
        assert_eq!(a.to_bits(), b.to_bits());
        let d = DirectionAngles::new(1.0, 0.5);
        let a = max_sidelobe_ratio_with(&cfg, &d, ONE_DEGREE, Exec::Sequential).unwrap();
        let b = max_sidelobe_ratio_with(&cfg, &d, ONE_DEGREE, Exec::Parallel).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn centroid_cases() {
        let p = Position3D::new(1.0, 2.0, 3.0);
        assert_eq!(swarm_centroid(&[p]).unwrap(), p);
        let q = Position3D::new(3.0, -2.0, 5.0);
        assert_eq!(swarm_centroid(&[p, q]).unwrap(), Position3D::new(2.0, 0.0, 4.0));
        assert!(swarm_centroid(&[]).is_err());
    }

    fn arb_swarm() -> impl Strategy<Value = (Vec<(f64, f64, f64)>, Vec<f64>)> {
        (1usize..7).prop_flat_map(|n| {
            (
                prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0), n),
                prop::collection::vec(0.05f64..1.0, n),
            )
        })
    }

    fn build(pos: &[(f64, f64, f64)], w: &[f64]) -> VaaConfig {
        VaaConfig::new(
            pos.iter().map(|&(x, y, z)| Position3D::new(x, y, z)).collect(),
            w.to_vec(),
            1.0,
            1.0,
        )
        .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn translation_leaves_magnitude_unchanged(
            (pos, w) in arb_swarm(),
            shift in (-1e3f64..1e3, -1e3f64..1e3, -1e3f64..1e3),
            t in 0.0f64..PI, p in -PI..PI,
        ) {
            let a = build(&pos, &w);
            let moved: Vec<_> = pos.iter().map(|&(x, y, z)| (x + shift.0, y + shift.1, z + shift.2)).collect();
            let b = build(&moved, &w);
            let d = DirectionAngles::new(t, p);
            prop_assert!((array_factor(&a, &d).norm() - array_factor(&b, &d).norm()).abs() < 1e-9);
        }

        #[test]
        fn af_bounded_by_weight_sum((pos, w) in arb_swarm(), t in 0.0f64..PI, p in -PI..PI) {
            let cfg = build(&pos, &w);
            let af = array_factor(&cfg, &DirectionAngles::new(t, p)).norm();
            prop_assert!(af <= cfg.weight_sum() * (1.0 + 1e-12));
        }

        #[test]
        fn sidelobe_ratio_is_scale_invariant((pos, w) in arb_swarm(), c in 0.1f64..1.0) {
            let a = build(&pos, &w);
            let scaled: Vec<f64> = w.iter().map(|x| x * c).collect();
            let b = build(&pos, &scaled);
            let d = DirectionAngles::new(PI / 3.0, 0.4);
            let ra = max_sidelobe_ratio(&a, &d, 2.0 * ONE_DEGREE).unwrap();
            let rb = max_sidelobe_ratio(&b, &d, 2.0 * ONE_DEGREE).unwrap();
            prop_assert!((ra - rb).abs() <= 1e-9 * ra.max(1.0));
        }
    }

    #[test]
    fn gain_integrates_to_four_pi_eta() {
        let cfg = VaaConfig::new(
            vec![
                Position3D::new(0.0, 0.0, 0.0),
                Position3D::new(0.3, 0.1, 0.0),
                Position3D::new(-0.2, 0.4, 0.25),
            ],
            vec![1.0, 0.6, 0.8],
            1.0,
            0.7,
        )
        .unwrap();
        let integral = radiated_power_integral(&cfg, ONE_DEGREE);
        let n = 180;
        let d = PI / n as f64;
        let mut total = 0.0;
        for i in 1..n {
            let theta = i as f64 * d;
            for j in 0..2 * n {
                let phi = -PI + j as f64 * d;
                let g = directive_gain_with_integral(&cfg, &DirectionAngles::new(theta, phi), integral).unwrap();
                total += g * theta.sin() * d * d;
            }
        }
        assert_relative_eq!(total, 4.0 * PI * 0.7, max_relative = 1e-9);
    }
}
