//! Degradation of dissolved TCE by deposited nZVI with stoichiometric
//! passivation of the iron.
//!
//! Per unit water volume: `dc/dt = -K ρm c`, `dρm/dt = -f K ρm c` with
//! `K = kSA αs`. `ρm - f c` is invariant, which reduces the pair to a
//! logistic equation with a closed-form solution.

pub mod stage4;

pub use stage4::{run_stage4, Stage4Config, Stage4Output};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KineticParams {
    /// Surface-area-normalised rate constant, m³/(m² s).
    pub k_sa: f64,
    /// Specific surface area of the iron, m²/kg.
    pub alpha_s: f64,
    /// Iron consumed per unit TCE degraded (mass basis).
    pub stoichiometry: f64,
}

impl Default for KineticParams {
    fn default() -> Self {
        KineticParams { k_sa: 2.6e-6 / 3600.0, alpha_s: 2.3e4, stoichiometry: 0.85 }
    }
}

impl KineticParams {
    pub fn validate(&self) -> Result<()> {
        if self.k_sa >= 0.0 && self.alpha_s > 0.0 && self.stoichiometry > 0.0 {
            Ok(())
        } else {
            Err(Error::config(format!("invalid kinetic parameters: {self:?}")))
        }
    }

    /// Second-order rate constant `kSA αs`, m³/(kg s).
    #[inline]
    pub fn rate_constant(&self) -> f64 {
        self.k_sa * self.alpha_s
    }
}

/// Degradation rate `kSA αs ρm c`, kg/m³/s.
#[inline]
pub fn degradation_rate(c: f64, rho_m: f64, params: &KineticParams) -> f64 {
    params.rate_constant() * rho_m * c
}

/// `x(t)` for `dx/dt = -a x - b x²`, `x(0) = x0 >= 0`, `a` of either sign.
#[inline]
fn logistic_decay(x0: f64, a: f64, b: f64, t: f64) -> f64 {
    if x0 == 0.0 {
        return 0.0;
    }
    let at = a * t;
    let g = if at == 0.0 { t } else { -(-at).exp_m1() / a };
    x0 * (-at).exp() / (1.0 + b * x0 * g)
}

/// Exact update of the local pair over `dt`. Both outputs stay non-negative.
#[inline]
pub fn react_cell(c: f64, rho_m: f64, dt: f64, params: &KineticParams) -> (f64, f64) {
    let k = params.rate_constant();
    if k == 0.0 || c <= 0.0 || rho_m <= 0.0 {
        return (c, rho_m);
    }
    let f = params.stoichiometry;
    let inv = rho_m - f * c;
    if inv >= 0.0 {
        // TCE is the limiting species
        let c_new = logistic_decay(c, k * inv, k * f, dt);
        (c_new, inv + f * c_new)
    } else {
        // iron is limiting; integrate it and recover c from the invariant
        let rho_new = logistic_decay(rho_m, -k * inv, k, dt);
        (((rho_new - inv) / f).max(0.0), rho_new)
    }
}

/// Cumulative exchange of one reaction sweep, kg per m thickness.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ReactionTally {
    pub tce_degraded: f64,
    pub iron_consumed: f64,
}

/// Applies the local reaction in every cell; `theta` converts per-water to
/// per-bulk amounts.
pub fn reactive_step(
    c: &mut [f64],
    rho_m: &mut [f64],
    theta: &[f64],
    cell_volume: f64,
    dt: f64,
    params: &KineticParams,
) -> Result<ReactionTally> {
    use rayon::prelude::*;
    if params.rate_constant() == 0.0 {
        return Ok(ReactionTally::default());
    }
    let parts: Vec<(f64, f64)> = c
        .par_iter_mut()
        .zip(rho_m.par_iter_mut())
        .zip(theta.par_iter())
        .map(|((c, r), &t)| {
            let (c_new, r_new) = react_cell(*c, *r, dt, params);
            let out = (t * (*c - c_new), t * (*r - r_new));
            *c = c_new;
            *r = r_new;
            out
        })
        .collect();
    let mut tally = ReactionTally::default();
    for (d, i) in parts {
        tally.tce_degraded += d * cell_volume;
        tally.iron_consumed += i * cell_volume;
    }
    if c.iter().chain(rho_m.iter()).any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::solver("reaction produced a negative or non-finite state"));
    }
    Ok(tally)
}

/// Active iron remaining relative to `initial` (`Σ θ ρm V`).
pub fn unreacted_fraction(rho_m: &[f64], theta: &[f64], cell_volume: f64, initial: f64) -> f64 {
    if initial <= 0.0 {
        return 0.0;
    }
    rho_m.iter().zip(theta).map(|(r, t)| r * t).sum::<f64>() * cell_volume / initial
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_constant_unit_conversion() {
        let p = KineticParams::default();
        let per_hour = p.rate_constant() * 1.0 * 3600.0;
        assert!((per_hour - 0.0598).abs() < 1e-12);
        let half_life_h = std::f64::consts::LN_2 / per_hour;
        assert!((half_life_h - 11.59).abs() < 0.01);
    }

    #[test]
    fn rate_examples() {
        let p = KineticParams::default();
        assert_eq!(degradation_rate(1.0, 0.0, &p), 0.0);
        let r = degradation_rate(0.5, 2.0, &p);
        assert!((degradation_rate(1.0, 2.0, &p) - 2.0 * r).abs() < 1e-20);
        assert!((degradation_rate(0.5, 4.0, &p) - 2.0 * r).abs() < 1e-20);
    }

    #[test]
    fn frozen_iron_without_tce() {
        let p = KineticParams::default();
        assert_eq!(react_cell(0.0, 3.0, 1e5, &p), (0.0, 3.0));
    }

    #[test]
    fn invariant_and_stoichiometry_hold() {
        let p = KineticParams::default();
        for &(c, r) in &[(1.27, 5.0), (1.27, 0.5), (0.3, 0.255), (1e-6, 2.0)] {
            for &dt in &[1.0, 3600.0, 1e6] {
                let (c2, r2) = react_cell(c, r, dt, &p);
                assert!(c2 >= 0.0 && r2 >= 0.0 && c2 <= c && r2 <= r);
                let consumed = r - r2;
                let degraded = c - c2;
                assert!((consumed - 0.85 * degraded).abs() <= 1e-12 * r.max(c));
            }
        }
    }

    #[test]
    fn first_order_limit_for_abundant_iron() {
        // c ≪ ρm: nearly first order at K ρm
        let p = KineticParams::default();
        let (c, _) = react_cell(1e-9, 1.0, 11.59 * 3600.0, &p);
        assert!((c / 1e-9 - 0.5).abs() < 1e-3);
    }

    #[test]
    fn unreacted_fraction_examples() {
        let theta = [0.4, 0.4];
        assert_eq!(unreacted_fraction(&[1.0, 1.0], &theta, 1.0, 0.8), 1.0);
        assert_eq!(unreacted_fraction(&[0.0, 0.0], &theta, 1.0, 0.8), 0.0);
        assert_eq!(unreacted_fraction(&[0.0, 1.0], &theta, 1.0, 0.8), 0.5);
        assert_eq!(unreacted_fraction(&[0.0, 1.0], &theta, 1.0, 0.0), 0.0);
    }
}
