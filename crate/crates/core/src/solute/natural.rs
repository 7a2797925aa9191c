//! Dissolution and transport of TCE under the natural head gradient.
//!
//! Shared by the long-term plume stage and the post-injection stage so both
//! advance fields with exactly the same sequence of operations.

use rayon::prelude::*;

use super::dissolution::{dissolve_cell, DissolutionParams};
use super::transport::{ExchangeLedger, InflowBC, TransportOperator, TransportParams};
use crate::error::{Error, Result};
use crate::flow::{solve_pressure_mobility, FlowBC, FlowField};
use crate::grid::{Grid, MaterialMap};
use crate::nzvi::{cmc_viscosity, CmcParams};
use crate::state::SimState;
use crate::twophase::{closure, FluidProps};

#[derive(Clone, Debug, PartialEq)]
pub struct NaturalFlowConfig {
    pub left_head: f64,
    pub right_head: f64,
    pub transport: TransportParams,
    pub dissolution: DissolutionParams,
    pub cmc: CmcParams,
    /// Interval between flow re-solves, s; `None` solves once at the start.
    pub flow_refresh: Option<f64>,
}

impl Default for NaturalFlowConfig {
    fn default() -> Self {
        NaturalFlowConfig {
            left_head: 13.25,
            right_head: 12.0,
            transport: TransportParams::default(),
            dissolution: DissolutionParams::default(),
            cmc: CmcParams::default(),
            flow_refresh: None,
        }
    }
}

impl NaturalFlowConfig {
    pub fn validate(&self) -> Result<()> {
        self.transport.validate()?;
        self.dissolution.validate()?;
        self.cmc.validate()?;
        if !(self.left_head.is_finite() && self.right_head.is_finite()) {
            return Err(Error::config("boundary heads must be finite"));
        }
        if let Some(r) = self.flow_refresh {
            if !(r > 0.0) {
                return Err(Error::config("flow refresh interval must be positive"));
            }
        }
        Ok(())
    }
}

/// Water mobility `k krw(Sw) / μ(c_cmc)` per cell.
pub fn water_mobility(materials: &MaterialMap, state: &SimState, fluids: &FluidProps, cmc: &CmcParams) -> Vec<f64> {
    (0..state.num_cells())
        .map(|c| {
            let p = materials.props_of(c);
            let krw = closure::evaluate(p, state.sn[c]).krw;
            let mu = cmc_viscosity(state.c_cmc[c], cmc, fluids.mu_w);
            state.k[c] * krw / mu
        })
        .collect()
}

pub const LEDGER_DISSOLVED: &str = "tce.dissolved";
pub const LEDGER_TCE_IN: &str = "tce.aqueous_in";
pub const LEDGER_TCE_OUT: &str = "tce.aqueous_out";
pub const LEDGER_CMC_IN: &str = "cmc.boundary_in";
pub const LEDGER_CMC_OUT: &str = "cmc.boundary_out";

pub struct NaturalStepper<'a> {
    pub grid: &'a Grid,
    pub materials: &'a MaterialMap,
    pub fluids: FluidProps,
    pub cfg: NaturalFlowConfig,
    pub flow: FlowField,
    op: TransportOperator,
    last_solve: f64,
}

impl<'a> NaturalStepper<'a> {
    pub fn new(grid: &'a Grid, materials: &'a MaterialMap, fluids: &FluidProps, cfg: &NaturalFlowConfig, state: &SimState) -> Result<Self> {
        cfg.validate()?;
        let (flow, op) = Self::solve(grid, materials, fluids, cfg, state)?;
        Ok(NaturalStepper { grid, materials, fluids: *fluids, cfg: cfg.clone(), flow, op, last_solve: state.clock })
    }

    fn solve(
        grid: &Grid,
        materials: &MaterialMap,
        fluids: &FluidProps,
        cfg: &NaturalFlowConfig,
        state: &SimState,
    ) -> Result<(FlowField, TransportOperator)> {
        let mobility = water_mobility(materials, state, fluids, &cfg.cmc);
        let flow = solve_pressure_mobility(grid, &mobility, fluids, &FlowBC::heads(cfg.left_head, cfg.right_head))?;
        let op = TransportOperator::new(grid, &flow, &state.theta_m, &cfg.transport)?;
        Ok((flow, op))
    }

    pub fn operator(&self) -> &TransportOperator {
        &self.op
    }

    pub fn stable_dt(&self) -> f64 {
        self.op.stable_dt()
    }

    /// Time at which the flow field is next re-solved.
    pub fn next_refresh(&self) -> f64 {
        self.cfg.flow_refresh.map_or(f64::INFINITY, |r| self.last_solve + r)
    }

    /// Re-solves flow if the refresh interval has elapsed.
    pub fn maybe_refresh(&mut self, state: &mut SimState) -> Result<()> {
        if state.clock >= self.next_refresh() - 1e-6 {
            let (flow, op) = Self::solve(self.grid, self.materials, &self.fluids, &self.cfg, state)?;
            self.flow = flow;
            self.op = op;
            self.last_solve = state.clock;
            state.pw.clone_from(&self.flow.pressure);
        }
        Ok(())
    }

    /// Transport of TCE and CMC followed by local dissolution. Does not
    /// advance the clock.
    pub fn step(&self, state: &mut SimState, dt: f64) -> Result<()> {
        let grid = self.grid;
        let mut tce = ExchangeLedger::default();
        self.op.step(grid, &mut state.c_tce, dt, InflowBC::ZeroGradient, 0.0, &mut tce)?;
        state.add_ledger(LEDGER_TCE_IN, tce.boundary_in);
        state.add_ledger(LEDGER_TCE_OUT, tce.boundary_out);
        if state.c_cmc.iter().any(|&c| c != 0.0) {
            let mut cmc = ExchangeLedger::default();
            self.op.step(grid, &mut state.c_cmc, dt, InflowBC::ZeroGradient, 0.0, &mut cmc)?;
            state.add_ledger(LEDGER_CMC_IN, cmc.boundary_in);
            state.add_ledger(LEDGER_CMC_OUT, cmc.boundary_out);
        }
        let dissolved = dissolve_all(state, &self.fluids, &self.cfg.dissolution, dt, grid.cell_volume());
        state.add_ledger(LEDGER_DISSOLVED, dissolved);
        Ok(())
    }
}

/// Applies local dissolution in every cell holding TCE; returns the mass
/// moved to solution (kg per m thickness).
pub fn dissolve_all(state: &mut SimState, fluids: &FluidProps, params: &DissolutionParams, dt: f64, cell_volume: f64) -> f64 {
    let rho_n = fluids.rho_n;
    let moved: Vec<f64> = state
        .sn
        .par_iter_mut()
        .zip(state.c_tce.par_iter_mut())
        .zip(state.theta_m.par_iter())
        .map(|((sn, c), &theta)| dissolve_cell(sn, c, theta, rho_n, dt, params))
        .collect();
    state.sync_water_saturation();
    moved.iter().sum::<f64>() * cell_volume
}

/// TCE held as separate phase, kg per m thickness.
pub fn napl_mass(state: &SimState, fluids: &FluidProps, cell_volume: f64) -> f64 {
    state.sn.iter().zip(&state.theta_m).map(|(s, t)| s * t).sum::<f64>() * fluids.rho_n * cell_volume
}

/// Dissolved mass `Σ θ V c` of a species.
pub fn aqueous_mass(c: &[f64], theta: &[f64], cell_volume: f64) -> f64 {
    c.iter().zip(theta).map(|(c, t)| c * t).sum::<f64>() * cell_volume
}
