//! Stage 1 two-phase flow of water and TCE.

pub mod closure;
pub mod impes;
pub mod stage1;
pub mod stats;

pub use closure::{capillary_pressure, effective_saturation, napl_entry_permitted, rel_perm};
pub use impes::{advance, impes_step, phase_fluxes, PhaseFluxes, TwoPhaseProblem, TwoPhaseState};
pub use stage1::{run_stage1, Stage1Config, Stage1Output};
pub use stats::{source_zone_stats, Pool, SourceZoneStats};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluidProps {
    pub rho_w: f64,
    pub rho_n: f64,
    pub mu_w: f64,
    pub mu_n: f64,
    /// TCE solubility, kg/m³.
    pub solubility: f64,
    pub g: f64,
}

impl Default for FluidProps {
    fn default() -> Self {
        FluidProps { rho_w: 1000.0, rho_n: 1470.0, mu_w: 1e-3, mu_n: 5e-4, solubility: 1.27, g: 9.81 }
    }
}

impl FluidProps {
    pub fn validate(&self) -> Result<()> {
        let all_positive = [self.rho_w, self.rho_n, self.mu_w, self.mu_n, self.solubility, self.g]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        if !all_positive {
            return Err(Error::config(format!("fluid properties must be positive: {self:?}")));
        }
        if self.rho_n <= self.rho_w {
            return Err(Error::config("TCE must be denser than water"));
        }
        Ok(())
    }
}
