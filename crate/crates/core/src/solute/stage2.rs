//! Stage 2: long-term dissolution of the source zone and plume growth.

use super::natural::{aqueous_mass, napl_mass, NaturalFlowConfig, NaturalStepper};
use crate::error::{Error, Result};
use crate::grid::{Grid, MaterialMap};
use crate::state::SimState;
use crate::twophase::FluidProps;
use crate::units::{SECONDS_PER_DAY, SECONDS_PER_YEAR};

#[derive(Clone, Debug, PartialEq)]
pub struct Stage2Config {
    pub duration: f64,
    pub snapshot_times: Vec<f64>,
    pub series_interval: f64,
    pub natural: NaturalFlowConfig,
}

impl Default for Stage2Config {
    fn default() -> Self {
        Stage2Config {
            duration: 11.0 * SECONDS_PER_YEAR,
            snapshot_times: [0.1, 0.4, 1.0, 3.0, 6.0, 11.0].iter().map(|y| y * SECONDS_PER_YEAR).collect(),
            series_interval: 5.0 * SECONDS_PER_DAY,
            natural: NaturalFlowConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlumeRow {
    /// Time since the start of the stage, s.
    pub time: f64,
    pub napl_mass: f64,
    pub undissolved_fraction: f64,
    pub aqueous_mass: f64,
    pub outflow: f64,
    /// Concentration at the monitoring cells.
    pub probe: f64,
    /// Smallest `c / Cs` among cells still holding TCE (1 if none).
    pub source_ratio_min: f64,
}

#[derive(Clone, Debug)]
pub struct MassAudit {
    pub initial: f64,
    pub final_stored: f64,
    pub net_outflow: f64,
    /// |initial - stored - net outflow| / initial.
    pub closure: f64,
}

#[derive(Clone, Debug)]
pub struct Stage2Output {
    pub series: Vec<PlumeRow>,
    pub snapshots: Vec<(f64, Vec<f64>)>,
    pub audit: MassAudit,
}

/// Concentration at a set of probe cells (mean over the screen).
pub fn probe(c: &[f64], cells: &[usize]) -> f64 {
    if cells.is_empty() {
        0.0
    } else {
        cells.iter().map(|&i| c[i]).sum::<f64>() / cells.len() as f64
    }
}

pub(crate) fn source_ratio_min(state: &SimState, solubility: f64) -> f64 {
    state
        .sn
        .iter()
        .zip(&state.c_tce)
        .filter(|(s, _)| **s > 0.0)
        .map(|(_, c)| c / solubility)
        .fold(1.0, f64::min)
}

pub(crate) fn event_times(duration: f64, interval: f64, extra: &[f64]) -> Vec<f64> {
    let mut t: Vec<f64> = extra.iter().copied().filter(|&x| x > 0.0 && x <= duration).collect();
    if interval > 0.0 {
        let rows = (duration / interval).floor() as usize;
        t.extend((1..=rows).map(|k| k as f64 * interval));
    }
    t.push(duration);
    t.sort_by(f64::total_cmp);
    t.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    t
}

/// Advances `state` through Stage 2. `probe_cells` are the monitoring cells.
pub fn run_stage2(
    grid: &Grid,
    materials: &MaterialMap,
    fluids: &FluidProps,
    cfg: &Stage2Config,
    probe_cells: &[usize],
    state: &mut SimState,
) -> Result<Stage2Output> {
    if !(cfg.duration >= 0.0) || !(cfg.series_interval > 0.0) {
        return Err(Error::config("stage 2 duration and series interval must be positive"));
    }
    let v = grid.cell_volume();
    let cs = cfg.natural.dissolution.solubility;
    let mut stepper = NaturalStepper::new(grid, materials, fluids, &cfg.natural, state)?;
    state.pw.clone_from(&stepper.flow.pressure);
    let start = state.clock;
    let napl0 = napl_mass(state, fluids, v);
    let initial = napl0 + aqueous_mass(&state.c_tce, &state.theta_m, v);
    let out0 = state.ledger_value(super::natural::LEDGER_TCE_OUT) - state.ledger_value(super::natural::LEDGER_TCE_IN);
    let row = |state: &SimState| {
        let napl = napl_mass(state, fluids, v);
        PlumeRow {
            time: state.clock - start,
            napl_mass: napl,
            undissolved_fraction: if napl0 > 0.0 { napl / napl0 } else { 0.0 },
            aqueous_mass: aqueous_mass(&state.c_tce, &state.theta_m, v),
            outflow: state.ledger_value(super::natural::LEDGER_TCE_OUT)
                - state.ledger_value(super::natural::LEDGER_TCE_IN)
                - out0,
            probe: probe(&state.c_tce, probe_cells),
            source_ratio_min: source_ratio_min(state, cs),
        }
    };
    let mut series = vec![row(state)];
    let mut snapshots = Vec::new();
    for target in event_times(cfg.duration, cfg.series_interval, &cfg.snapshot_times) {
        advance_natural(&mut stepper, state, start + target, |_, _, _| Ok(()))?;
        series.push(row(state));
        if cfg.snapshot_times.iter().any(|s| (s - target).abs() < 1e-6) {
            snapshots.push((target, state.c_tce.clone()));
        }
    }
    let last = series.last().expect("series has the initial row");
    let stored = last.napl_mass + last.aqueous_mass;
    let closure = if initial > 0.0 { (initial - stored - last.outflow).abs() / initial } else { 0.0 };
    let audit = MassAudit { initial, final_stored: stored, net_outflow: last.outflow, closure };
    state.stage = 2;
    Ok(Stage2Output { series, snapshots, audit })
}

/// Steps the natural-flow model until `state.clock == t_end`, calling
/// `local(state, dt, stepper)` after each transport/dissolution step.
pub fn advance_natural(
    stepper: &mut NaturalStepper,
    state: &mut SimState,
    t_end: f64,
    mut local: impl FnMut(&mut SimState, f64, &NaturalStepper) -> Result<()>,
) -> Result<()> {
    while state.clock < t_end {
        stepper.maybe_refresh(state)?;
        let remaining = t_end - state.clock;
        let to_refresh = stepper.next_refresh() - state.clock;
        let mut dt = stepper.stable_dt().min(remaining);
        let mut land = dt == remaining;
        if to_refresh > 0.0 && to_refresh < dt {
            dt = to_refresh;
            land = false;
        }
        stepper.step(state, dt)?;
        local(state, dt, stepper)?;
        state.clock = if land { t_end } else { state.clock + dt };
    }
    Ok(())
}
