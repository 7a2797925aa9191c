//! Interphase mass transfer from residual and pooled TCE to water.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DissolutionParams {
    /// Lumped volumetric mass-transfer coefficient, 1/s.
    pub kl: f64,
    /// Aqueous solubility, kg/m³.
    pub solubility: f64,
}

impl Default for DissolutionParams {
    fn default() -> Self {
        DissolutionParams { kl: 1200.0 / crate::units::SECONDS_PER_DAY, solubility: 1.27 }
    }
}

impl DissolutionParams {
    pub fn validate(&self) -> Result<()> {
        if self.kl >= 0.0 && self.solubility > 0.0 {
            Ok(())
        } else {
            Err(Error::config(format!("invalid dissolution parameters: {self:?}")))
        }
    }
}

/// Instantaneous transfer rate `Kl (Cs - c)` (kg per m³ bulk per s) where
/// TCE is present.
#[inline]
pub fn dissolution_flux(sn: f64, c: f64, params: &DissolutionParams) -> f64 {
    if sn > 0.0 {
        params.kl * (params.solubility - c)
    } else {
        0.0
    }
}

/// Removes transferred mass from the TCE phase. `transfer` is kg per m³
/// bulk; returns the mass actually removed (capped by what the cell holds).
#[inline]
pub fn deplete_source(sn: &mut f64, transfer: f64, theta: f64, rho_n: f64) -> f64 {
    let available = (*sn * theta * rho_n).max(0.0);
    if transfer >= available {
        *sn = 0.0;
        available
    } else {
        *sn -= transfer / (theta * rho_n);
        transfer
    }
}

/// Local dissolution over `dt` in one cell: relaxes `c` towards solubility
/// with `θ dc/dt = Kl (Cs - c)` solved exactly, then caps the transfer at the
/// TCE mass present. Returns the transferred mass per m³ bulk.
#[inline]
pub fn dissolve_cell(sn: &mut f64, c: &mut f64, theta: f64, rho_n: f64, dt: f64, params: &DissolutionParams) -> f64 {
    if *sn <= 0.0 || *c >= params.solubility {
        return 0.0;
    }
    let target = params.solubility + (*c - params.solubility) * (-params.kl * dt / theta).exp();
    let wanted = theta * (target - *c);
    let moved = deplete_source(sn, wanted, theta, rho_n);
    *c += moved / theta;
    moved
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::SECONDS_PER_DAY;

    #[test]
    fn flux_examples() {
        let p = DissolutionParams::default();
        assert_eq!(dissolution_flux(0.2, 1.27, &p), 0.0);
        assert_eq!(dissolution_flux(0.0, 0.0, &p), 0.0);
        let q = dissolution_flux(0.2, 0.0, &p);
        assert!((q - 1200.0 / SECONDS_PER_DAY * 1.27).abs() < 1e-15);
        assert!((q - 1.764e-2).abs() < 1e-5);
    }

    #[test]
    fn depletion_examples() {
        let mut sn = 0.3;
        assert_eq!(deplete_source(&mut sn, 0.0, 0.4, 1470.0), 0.0);
        assert_eq!(sn, 0.3);
        // 1 kg/m³ of TCE asked to give up 2 kg/m³
        let theta = 0.4;
        let mut sn = 1.0 / (theta * 1470.0);
        let moved = deplete_source(&mut sn, 2.0, theta, 1470.0);
        assert_eq!(sn, 0.0);
        assert!((moved - 1.0).abs() < 1e-15);
    }

    #[test]
    fn transfer_is_conservative_and_bounded() {
        let p = DissolutionParams::default();
        let (theta, rho) = (0.4, 1470.0);
        let mut sn = 0.05;
        let mut c = 0.1;
        let before = sn * theta * rho + theta * c;
        let moved = dissolve_cell(&mut sn, &mut c, theta, rho, 3600.0, &p);
        assert!(moved > 0.0);
        assert!(c <= p.solubility + 1e-12);
        assert!((sn * theta * rho + theta * c - before).abs() < 1e-12);
    }

    #[test]
    fn closed_cell_reaches_solubility() {
        // integrate the closed-cell ODE with many small steps and compare with
        // the exact relaxation
        let p = DissolutionParams { kl: 1e-3, solubility: 1.27 };
        let (theta, rho) = (0.3, 1470.0);
        let mut sn = 0.2;
        let mut c = 0.0;
        let sn0 = sn;
        for _ in 0..1000 {
            dissolve_cell(&mut sn, &mut c, theta, rho, 10.0, &p);
        }
        let exact = p.solubility * (1.0 - (-p.kl * 10_000.0 / theta).exp());
        assert!((c - exact).abs() < 1e-3 * exact);
        let napl_loss = (sn0 - sn) * theta * rho;
        assert!((napl_loss - theta * c).abs() < 1e-12);
    }

    #[test]
    fn exhausted_cell_stops_below_solubility() {
        let p = DissolutionParams::default();
        let mut sn = 1e-6;
        let mut c = 0.0;
        dissolve_cell(&mut sn, &mut c, 0.4, 1470.0, 1e4, &p);
        assert_eq!(sn, 0.0);
        assert!((c - 1e-6 * 1470.0).abs() < 1e-12);
    }
}
