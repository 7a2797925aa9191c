//! Stage 4: natural-gradient flow through the iron zone with degradation.

use super::{reactive_step, unreacted_fraction, KineticParams};
use crate::error::{Error, Result};
use crate::grid::{Grid, MaterialMap};
use crate::solute::natural::{aqueous_mass, napl_mass, NaturalFlowConfig, NaturalStepper, LEDGER_TCE_IN, LEDGER_TCE_OUT};
use crate::solute::stage2::{advance_natural, event_times, probe};
use crate::state::SimState;
use crate::twophase::FluidProps;
use crate::units::{SECONDS_PER_DAY, SECONDS_PER_YEAR};

pub const LEDGER_DEGRADED: &str = "tce.degraded";
pub const LEDGER_IRON_CONSUMED: &str = "iron.consumed";
pub const LEDGER_DEPOSITED_AT_REST: &str = "nzvi.deposited_at_rest";

#[derive(Clone, Debug, PartialEq)]
pub struct Stage4Config {
    pub duration: f64,
    pub snapshot_times: Vec<f64>,
    pub series_interval: f64,
    pub natural: NaturalFlowConfig,
    /// `None` runs the same stepper with no reaction at all.
    pub kinetics: Option<KineticParams>,
}

impl Default for Stage4Config {
    fn default() -> Self {
        let y = SECONDS_PER_YEAR;
        Stage4Config {
            duration: 2.5 * y,
            snapshot_times: vec![5.0 * SECONDS_PER_DAY, y / 6.0, 0.5 * y, y, 1.5 * y, 2.5 * y],
            series_interval: SECONDS_PER_DAY,
            natural: NaturalFlowConfig { flow_refresh: Some(30.0 * SECONDS_PER_DAY), ..NaturalFlowConfig::default() },
            kinetics: Some(KineticParams::default()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReactionRow {
    /// Time since the start of the stage, s.
    pub time: f64,
    pub unreacted_fraction: f64,
    pub tce_degraded: f64,
    pub iron_consumed: f64,
    pub probe: f64,
    pub napl_mass: f64,
    pub aqueous_mass: f64,
    pub outflow: f64,
}

#[derive(Clone, Debug)]
pub struct Stage4Output {
    pub series: Vec<ReactionRow>,
    pub snapshots: Vec<(f64, Vec<f64>)>,
    /// Active iron at the start of the stage, kg per m thickness.
    pub initial_iron: f64,
    /// Iron consumed / TCE degraded over the stage.
    pub stoichiometric_ratio: f64,
    /// |initial TCE - (NAPL + aqueous + degraded + net outflow)| / initial.
    pub tce_closure: f64,
}

/// Deposits any aqueous nZVI left from injection and converts deposited
/// iron into active iron per unit water volume.
pub fn initialise_iron(state: &mut SimState, cell_volume: f64) {
    let mut moved = 0.0;
    for c in 0..state.num_cells() {
        let aq = state.c_nzvi[c];
        if aq > 0.0 {
            state.s_bulk[c] += state.theta_m[c] * aq;
            moved += state.theta_m[c] * aq;
            state.c_nzvi[c] = 0.0;
        }
        state.rho_m[c] = state.s_bulk[c] / state.theta_m[c];
    }
    state.add_ledger(LEDGER_DEPOSITED_AT_REST, moved * cell_volume);
}

pub fn run_stage4(
    grid: &Grid,
    materials: &MaterialMap,
    fluids: &FluidProps,
    cfg: &Stage4Config,
    probe_cells: &[usize],
    state: &mut SimState,
) -> Result<Stage4Output> {
    if let Some(k) = &cfg.kinetics {
        k.validate()?;
    }
    if !(cfg.duration >= 0.0) || !(cfg.series_interval > 0.0) {
        return Err(Error::config("stage 4 duration and series interval must be positive"));
    }
    let v = grid.cell_volume();
    initialise_iron(state, v);
    let initial_iron: f64 = state.rho_m.iter().zip(&state.theta_m).map(|(r, t)| r * t).sum::<f64>() * v;
    let mut stepper = NaturalStepper::new(grid, materials, fluids, &cfg.natural, state)?;
    state.pw.clone_from(&stepper.flow.pressure);
    let start = state.clock;
    let tce0 = napl_mass(state, fluids, v) + aqueous_mass(&state.c_tce, &state.theta_m, v);
    let out0 = state.ledger_value(LEDGER_TCE_OUT) - state.ledger_value(LEDGER_TCE_IN);
    let deg0 = state.ledger_value(LEDGER_DEGRADED);
    let iron0 = state.ledger_value(LEDGER_IRON_CONSUMED);

    let row = |state: &SimState| ReactionRow {
        time: state.clock - start,
        unreacted_fraction: unreacted_fraction(&state.rho_m, &state.theta_m, v, initial_iron),
        tce_degraded: state.ledger_value(LEDGER_DEGRADED) - deg0,
        iron_consumed: state.ledger_value(LEDGER_IRON_CONSUMED) - iron0,
        probe: probe(&state.c_tce, probe_cells),
        napl_mass: napl_mass(state, fluids, v),
        aqueous_mass: aqueous_mass(&state.c_tce, &state.theta_m, v),
        outflow: state.ledger_value(LEDGER_TCE_OUT) - state.ledger_value(LEDGER_TCE_IN) - out0,
    };
    let mut series = vec![row(state)];
    let mut snapshots = Vec::new();
    let kinetics = cfg.kinetics;
    for target in event_times(cfg.duration, cfg.series_interval, &cfg.snapshot_times) {
        advance_natural(&mut stepper, state, start + target, |state, dt, _| {
            if let Some(k) = &kinetics {
                let tally = reactive_step(&mut state.c_tce, &mut state.rho_m, &state.theta_m, v, dt, k)?;
                state.add_ledger(LEDGER_DEGRADED, tally.tce_degraded);
                state.add_ledger(LEDGER_IRON_CONSUMED, tally.iron_consumed);
            }
            Ok(())
        })?;
        series.push(row(state));
        if cfg.snapshot_times.iter().any(|s| (s - target).abs() < 1e-6) {
            snapshots.push((target, state.c_tce.clone()));
        }
    }
    let last = series.last().expect("series has the initial row");
    let stoichiometric_ratio = if last.tce_degraded > 0.0 { last.iron_consumed / last.tce_degraded } else { 0.0 };
    let accounted = last.napl_mass + last.aqueous_mass + last.tce_degraded + last.outflow;
    let tce_closure = if tce0 > 0.0 { (tce0 - accounted).abs() / tce0 } else { 0.0 };
    state.stage = 4;
    Ok(Stage4Output { series, snapshots, initial_iron, stoichiometric_ratio, tce_closure })
}
