//! CMC-stabilised nZVI: filtration, retention, pore clogging and the
//! polymer's effect on viscosity.

pub mod stage3;

pub use stage3::{roi, run_stage3, LayerRoi, Stage3Config, Stage3Output};

use crate::error::{Error, Result};
use crate::units::SECONDS_PER_DAY;

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NzviParams {
    /// Injected aqueous nZVI, kg/m³.
    pub concentration: f64,
    /// Particle diameter, m.
    pub particle_diameter: f64,
    pub attachment_efficiency: f64,
    /// Particle density, kg/m³.
    pub particle_density: f64,
    /// Darcy velocity across the well screen, m/s.
    pub injection_velocity: f64,
    /// Injection period, s.
    pub duration: f64,
    /// Groundwater temperature, K.
    pub temperature: f64,
    /// Hamaker constant, J.
    pub hamaker: f64,
}

impl Default for NzviParams {
    fn default() -> Self {
        NzviParams {
            concentration: 0.2,
            particle_diameter: 140e-9,
            attachment_efficiency: 0.02,
            particle_density: 6100.0,
            injection_velocity: 88.0 / SECONDS_PER_DAY,
            duration: 8.0 * 3600.0,
            temperature: 293.0,
            hamaker: 1e-20,
        }
    }
}

impl NzviParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.concentration >= 0.0
            && self.particle_diameter > 0.0
            && self.attachment_efficiency >= 0.0
            && self.attachment_efficiency <= 1.0
            && self.particle_density > 0.0
            && self.injection_velocity >= 0.0
            && self.duration >= 0.0
            && self.temperature > 0.0
            && self.hamaker > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("invalid nZVI parameters: {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CloggingParams {
    /// Clean-bed specific surface area, 1/m.
    pub a0: f64,
    /// Specific surface area of the deposited particles, 1/m.
    pub ap: f64,
    /// Sand grain density, kg/m³ (converts bulk to per-mass retention).
    pub solid_density: f64,
    /// Fraction of deposited iron that alters the surface area.
    pub gamma: f64,
    /// Density used to turn deposited mass into occupied pore volume, kg/m³.
    pub deposit_density: f64,
}

impl Default for CloggingParams {
    fn default() -> Self {
        CloggingParams { a0: 4.99e3, ap: 2.34e8, solid_density: 2600.0, gamma: 1.04e-3, deposit_density: 6100.0 }
    }
}

impl CloggingParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.a0 > 0.0
            && self.ap > 0.0
            && self.solid_density > 0.0
            && self.gamma > 0.0
            && self.gamma <= 1.0
            && self.deposit_density > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("invalid clogging parameters: {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CmcParams {
    /// Injected CMC concentration, kg/m³.
    pub concentration: f64,
    /// Viscosity of the injected solution, Pa·s.
    pub viscosity: f64,
    /// CMC mole fraction of the injected solution.
    pub mole_fraction: f64,
}

impl Default for CmcParams {
    fn default() -> Self {
        CmcParams { concentration: 3.0, viscosity: 0.0027, mole_fraction: 8.04e-7 }
    }
}

impl CmcParams {
    pub fn validate(&self) -> Result<()> {
        if self.concentration > 0.0 && self.viscosity > 0.0 && self.mole_fraction > 0.0 {
            Ok(())
        } else {
            Err(Error::config(format!("invalid CMC parameters: {self:?}")))
        }
    }
}

/// Kozeny–Carman grain (collector) diameter.
#[inline]
pub fn collector_diameter(k: f64, theta: f64) -> f64 {
    (k * (1.0 - theta).powi(2) * 180.0 / theta.powi(3)).sqrt()
}

/// Happel sphere-in-cell porosity parameter.
#[inline]
pub fn happel_as(theta: f64) -> f64 {
    let g = (1.0 - theta).cbrt();
    2.0 * (1.0 - g.powi(5)) / (2.0 - 3.0 * g + 3.0 * g.powi(5) - 2.0 * g.powi(6))
}

/// Inputs of the single-collector contact efficiency correlation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollectorInputs {
    pub particle_diameter: f64,
    pub collector_diameter: f64,
    /// Approach (pore-water) velocity, m/s.
    pub velocity: f64,
    pub porosity: f64,
    pub temperature: f64,
    pub particle_density: f64,
    pub fluid_density: f64,
    pub viscosity: f64,
    pub hamaker: f64,
    pub gravity: f64,
}

/// Diffusion, interception and gravity contributions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollectorEfficiency {
    pub diffusion: f64,
    pub interception: f64,
    pub gravity: f64,
}

impl CollectorEfficiency {
    /// Total efficiency, clamped to (0, 1].
    pub fn total(&self) -> f64 {
        (self.diffusion + self.interception + self.gravity).clamp(f64::MIN_POSITIVE, 1.0)
    }
}

/// Tufenkji–Elimelech correlation terms for `inputs`.
pub fn collector_terms(p: &CollectorInputs) -> Result<CollectorEfficiency> {
    let positive = [
        p.particle_diameter,
        p.collector_diameter,
        p.velocity,
        p.temperature,
        p.viscosity,
        p.hamaker,
        p.gravity,
        p.fluid_density,
    ];
    if positive.iter().any(|v| !(*v > 0.0) || !v.is_finite()) || !(p.porosity > 0.0 && p.porosity < 1.0) {
        return Err(Error::input(format!("non-physical collector inputs: {p:?}")));
    }
    if p.particle_density < p.fluid_density {
        return Err(Error::input("particles lighter than water are outside the correlation"));
    }
    let kt = BOLTZMANN * p.temperature;
    let a_p = 0.5 * p.particle_diameter;
    let as_ = happel_as(p.porosity);
    let nr = p.particle_diameter / p.collector_diameter;
    let d_inf = kt / (3.0 * std::f64::consts::PI * p.viscosity * p.particle_diameter);
    let npe = p.velocity * p.collector_diameter / d_inf;
    let nvdw = p.hamaker / kt;
    let na = p.hamaker / (12.0 * std::f64::consts::PI * p.viscosity * a_p * a_p * p.velocity);
    let ng = 2.0 / 9.0 * a_p * a_p * (p.particle_density - p.fluid_density) * p.gravity / (p.viscosity * p.velocity);
    Ok(CollectorEfficiency {
        diffusion: 2.4 * as_.cbrt() * nr.powf(-0.081) * npe.powf(-0.715) * nvdw.powf(0.052),
        interception: 0.55 * as_ * nr.powf(1.675) * na.powf(0.125),
        gravity: if ng > 0.0 { 0.22 * nr.powf(-0.24) * ng.powf(1.11) * nvdw.powf(0.053) } else { 0.0 },
    })
}

/// Single-collector contact efficiency η0 in (0, 1]. A vanishing velocity
/// gives the diffusion-limited cap of 1.
pub fn single_collector_efficiency(p: &CollectorInputs) -> Result<f64> {
    if p.velocity == 0.0 {
        let probe = CollectorInputs { velocity: 1.0, ..*p };
        collector_terms(&probe)?;
        return Ok(1.0);
    }
    Ok(collector_terms(p)?.total())
}

/// First-order attachment rate `1.5 (1 - θ) v α η0 / dc`, 1/s.
#[inline]
pub fn attachment_rate(theta: f64, v: f64, alpha: f64, eta0: f64, dc: f64) -> f64 {
    1.5 * (1.0 - theta) * v * alpha * eta0 / dc
}

/// Retention over `dt` at a fixed attachment rate: returns the new aqueous
/// concentration and the deposited mass per m³ bulk.
#[inline]
pub fn retain(c: f64, katt: f64, theta: f64, dt: f64) -> (f64, f64) {
    let c_new = c * (-katt * dt).exp();
    (c_new, theta * (c - c_new))
}

/// Porosity, specific surface area and permeability after deposition of
/// `s_bulk` kg/m³ bulk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Clogged {
    pub theta: f64,
    pub area: f64,
    pub k: f64,
}

pub fn clogging_update(s_bulk: f64, theta0: f64, k0: f64, params: &CloggingParams, particle_density: f64) -> Result<Clogged> {
    if s_bulk < 0.0 {
        return Err(Error::input("negative retained mass"));
    }
    let theta = theta0 - s_bulk / params.deposit_density;
    if !(theta > 0.0) {
        return Err(Error::solver(format!("deposition of {s_bulk} kg/m³ fills the pore space")));
    }
    let area = params.a0 + params.ap * params.gamma * s_bulk / particle_density;
    let k = k0 * (theta / theta0).powi(3) * (params.a0 / area).powi(2);
    Ok(Clogged { theta, area, k })
}

/// Viscosity of a CMC solution: log-linear blend between water and the
/// injected solution, weighted by the concentration relative to injection.
#[inline]
pub fn cmc_viscosity(c: f64, params: &CmcParams, mu_w: f64) -> f64 {
    let w = (c / params.concentration).clamp(0.0, 1.0);
    if w == 0.0 {
        return mu_w;
    }
    if w == 1.0 {
        return params.viscosity;
    }
    (w * params.viscosity.ln() + (1.0 - w) * mu_w.ln()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn collector_diameter_examples() {
        assert!(rel(collector_diameter(1e-12, 0.4), (1e-12f64 * 0.36 * 180.0 / 0.064).sqrt()) < 1e-14);
        assert!((collector_diameter(1e-12, 0.4) - 3.18e-5).abs() < 0.01e-5);
        assert!((collector_diameter(0.5e-12, 0.27) - 4.93e-5).abs() < 0.01e-5);
        assert!(rel(collector_diameter(2e-12, 0.3) / collector_diameter(1e-12, 0.3), 2f64.sqrt()) < 1e-14);
    }

    #[test]
    fn attachment_rate_examples() {
        assert_eq!(attachment_rate(0.4, 1e-4, 0.0, 0.01, 3.18e-5), 0.0);
        let k = attachment_rate(0.4, 1e-4, 0.02, 0.01, 3.18e-5);
        assert!(rel(k, 1.5 * 0.6 * 1e-4 * 0.02 * 0.01 / 3.18e-5) < 1e-14);
        assert!((k - 5.66e-4).abs() < 0.01e-4);
        assert!(rel(attachment_rate(0.4, 1e-4, 0.04, 0.01, 3.18e-5), 2.0 * k) < 1e-14);
    }

    fn inputs() -> CollectorInputs {
        CollectorInputs {
            particle_diameter: 140e-9,
            collector_diameter: 3.18e-5,
            velocity: 1e-4,
            porosity: 0.4,
            temperature: 293.0,
            particle_density: 6100.0,
            fluid_density: 1000.0,
            viscosity: 0.0027,
            hamaker: 1e-20,
            gravity: 9.81,
        }
    }

    #[test]
    fn interception_scales_with_particle_size() {
        let a = collector_terms(&inputs()).unwrap();
        let b = collector_terms(&CollectorInputs { particle_diameter: 280e-9, ..inputs() }).unwrap();
        // NA also depends on the particle radius: ηI ∝ dp^1.675 · dp^-0.25
        assert!(rel(b.interception / a.interception, 2f64.powf(1.675) * 2f64.powf(-0.25)) < 1e-12);
    }

    #[test]
    fn efficiency_in_unit_interval_over_envelope() {
        for &v in &[1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2] {
            for &dc in &[1e-5, 3e-5, 1e-4] {
                for &mu in &[1e-3, 2.7e-3] {
                    for &theta in &[0.25, 0.4] {
                        let e = single_collector_efficiency(&CollectorInputs { velocity: v, collector_diameter: dc, viscosity: mu, porosity: theta, ..inputs() }).unwrap();
                        assert!(e > 0.0 && e <= 1.0);
                    }
                }
            }
        }
        assert_eq!(single_collector_efficiency(&CollectorInputs { velocity: 0.0, ..inputs() }).unwrap(), 1.0);
        assert!(single_collector_efficiency(&CollectorInputs { temperature: -1.0, ..inputs() }).is_err());
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn clogging_identity_and_peak_dose() {
        let p = CloggingParams::default();
        let c = clogging_update(0.0, 0.4, 1e-12, &p, 6100.0).unwrap();
        assert_eq!((c.theta, c.area, c.k), (0.4, 4.99e3, 1e-12));
        let c = clogging_update(3.14, 0.4, 1e-12, &p, 6100.0).unwrap();
        let dtheta = (0.4 - c.theta) / 0.4;
        let dk = (1e-12 - c.k) / 1e-12;
        assert!((dtheta - 0.0013).abs() < 0.0001, "{dtheta}");
        assert!(dk > 0.04 && dk < 0.06, "{dk}");
        assert!(clogging_update(-1.0, 0.4, 1e-12, &p, 6100.0).is_err());
        assert!(clogging_update(3000.0, 0.4, 1e-12, &p, 6100.0).is_err());
    }

    #[test]
    fn permeability_strictly_decreases_with_deposit() {
        let p = CloggingParams::default();
        let mut last = f64::INFINITY;
        for i in 0..100 {
            let k = clogging_update(i as f64 * 0.1, 0.3, 1e-12, &p, 6100.0).unwrap().k;
            assert!(k < last);
            last = k;
        }
    }

    #[test]
    fn viscosity_examples() {
        let p = CmcParams::default();
        assert_eq!(cmc_viscosity(0.0, &p, 1e-3), 1e-3);
        assert_eq!(cmc_viscosity(3.0, &p, 1e-3), 0.0027);
        assert!(rel(cmc_viscosity(1.5, &p, 1e-3), (1e-3f64 * 0.0027).sqrt()) < 1e-12);
        assert!((cmc_viscosity(1.5, &p, 1e-3) - 1.643e-3).abs() < 1e-6);
        assert_eq!(cmc_viscosity(10.0, &p, 1e-3), 0.0027);
    }

    #[test]
    fn retention_conserves_mass() {
        let (c, s) = retain(0.2, 1e-3, 0.4, 100.0);
        assert!((0.4 * 0.2 - 0.4 * c - s).abs() < 1e-15);
        assert_eq!(retain(0.2, 0.0, 0.4, 100.0).0, 0.2);
    }
}
