//! Stage 1: TCE infiltration from a surface strip and redistribution.

use super::impes::{advance, napl_mass, TwoPhaseProblem, TwoPhaseState};
use super::stats::{source_zone_stats, SourceZoneStats, DEFAULT_POOL_THRESHOLD};
use super::FluidProps;
use crate::error::{Error, Result};
use crate::grid::{strip_overlap, BoundaryTag, GeometryConfig, Grid, MaterialMap};
use crate::units::SECONDS_PER_DAY;

#[derive(Clone, Debug, PartialEq)]
pub struct Stage1Config {
    /// TCE mass flux over the strip, kg/m²/s.
    pub infiltration_flux: f64,
    /// Infiltration period, s.
    pub infiltration_duration: f64,
    /// Total simulated time, s.
    pub duration: f64,
    /// Initial water table (and lateral boundary) head, m above the bottom.
    pub water_table_head: f64,
    /// Times at which Sn snapshots are kept, s.
    pub snapshot_times: Vec<f64>,
    /// Interval between time-series rows, s.
    pub series_interval: f64,
    /// Window over which the final saturation change is reported, s.
    pub static_window: f64,
    pub cfl: f64,
    pub max_saturation_change: f64,
    pub max_upwind_iterations: usize,
    pub pressure_refresh: f64,
    pub pool_threshold: f64,
}

impl Default for Stage1Config {
    fn default() -> Self {
        let d = SECONDS_PER_DAY;
        Stage1Config {
            infiltration_flux: 0.001,
            infiltration_duration: 35.0 * d,
            duration: 135.0 * d,
            water_table_head: 12.0,
            snapshot_times: [5.0, 15.0, 25.0, 35.0, 40.0, 60.0, 85.0, 135.0].iter().map(|t| t * d).collect(),
            series_interval: d,
            static_window: 10.0 * d,
            cfl: 0.5,
            max_saturation_change: 0.1,
            max_upwind_iterations: 3,
            pressure_refresh: 0.02,
            pool_threshold: DEFAULT_POOL_THRESHOLD,
        }
    }
}

impl Stage1Config {
    pub fn validate(&self) -> Result<()> {
        let ok = self.infiltration_flux >= 0.0
            && self.infiltration_duration >= 0.0
            && self.duration > 0.0
            && self.series_interval > 0.0
            && self.static_window >= 0.0
            && self.cfl > 0.0
            && self.cfl <= 1.0
            && self.max_saturation_change > 0.0
            && self.pressure_refresh >= 0.0
            && self.pool_threshold > 0.0
            && self.snapshot_times.iter().all(|t| *t >= 0.0 && *t <= self.duration);
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("invalid stage 1 settings: {self:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesRow {
    pub time: f64,
    pub mass: f64,
    pub injected: f64,
    pub pool_fraction: f64,
    pub ganglia_fraction: f64,
    pub upper_fraction: f64,
    pub lower_fraction: f64,
}

#[derive(Clone, Debug)]
pub struct Stage1Output {
    pub state: TwoPhaseState,
    pub snapshots: Vec<(f64, Vec<f64>)>,
    pub series: Vec<SeriesRow>,
    pub stats: SourceZoneStats,
    /// Largest cellwise |ΔSn| over the final window.
    pub final_window_change: f64,
    /// |mass in domain + outflow - injected| / injected.
    pub mass_balance_error: f64,
}

/// Hydrostatic water pressure for a water table at `head`.
pub fn hydrostatic_pressure(grid: &Grid, head: f64, fluids: &FluidProps) -> Vec<f64> {
    (0..grid.num_cells()).map(|c| fluids.rho_w * fluids.g * (head - grid.center(c).1)).collect()
}

/// Lateral faces held hydrostatic at `head`.
pub fn lateral_hydrostatic_faces(grid: &Grid, head: f64, fluids: &FluidProps) -> Vec<(usize, f64)> {
    grid.boundary_faces(BoundaryTag::Left)
        .chain(grid.boundary_faces(BoundaryTag::Right))
        .map(|f| (f, fluids.rho_w * fluids.g * (head - grid.center(grid.faces[f].owner).1)))
        .collect()
}

/// Volumetric TCE source per cell from a surface mass flux over the strip.
pub fn strip_source(grid: &Grid, geometry: &GeometryConfig, flux: f64, fluids: &FluidProps) -> Vec<f64> {
    let mut src = vec![0.0; grid.num_cells()];
    for (f, len) in strip_overlap(grid, geometry) {
        src[grid.faces[f].owner] += flux * len / fluids.rho_n;
    }
    src
}

pub fn stage1_problem<'a>(
    grid: &'a Grid,
    materials: &'a MaterialMap,
    geometry: &GeometryConfig,
    fluids: &FluidProps,
    cfg: &Stage1Config,
) -> TwoPhaseProblem<'a> {
    TwoPhaseProblem {
        grid,
        materials,
        fluids: *fluids,
        dirichlet: lateral_hydrostatic_faces(grid, cfg.water_table_head, fluids),
        napl_source: strip_source(grid, geometry, cfg.infiltration_flux, fluids),
        source_end: cfg.infiltration_duration,
        cfl: cfg.cfl,
        max_saturation_change: cfg.max_saturation_change,
        max_upwind_iterations: cfg.max_upwind_iterations,
        pressure_refresh: cfg.pressure_refresh,
    }
}

fn stop_times(cfg: &Stage1Config) -> Vec<f64> {
    let mut t: Vec<f64> = cfg.snapshot_times.clone();
    let rows = (cfg.duration / cfg.series_interval).floor() as usize;
    t.extend((1..=rows).map(|k| k as f64 * cfg.series_interval));
    t.push(cfg.duration);
    t.push((cfg.duration - cfg.static_window).max(0.0));
    if cfg.infiltration_duration < cfg.duration {
        t.push(cfg.infiltration_duration);
    }
    t.retain(|&x| x > 0.0 && x <= cfg.duration);
    t.sort_by(f64::total_cmp);
    t.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    t
}

/// Runs Stage 1 from a hydrostatic, TCE-free state. `progress` is called at
/// every stop time.
pub fn run_stage1(
    grid: &Grid,
    materials: &MaterialMap,
    geometry: &GeometryConfig,
    fluids: &FluidProps,
    cfg: &Stage1Config,
    mut progress: impl FnMut(&TwoPhaseState),
) -> Result<Stage1Output> {
    cfg.validate()?;
    fluids.validate()?;
    let problem = stage1_problem(grid, materials, geometry, fluids, cfg);
    let n = grid.num_cells();
    let mut state = TwoPhaseState::new(vec![0.0; n], hydrostatic_pressure(grid, cfg.water_table_head, fluids));
    let mut snapshots = Vec::new();
    let mut series = Vec::new();
    let window_start = (cfg.duration - cfg.static_window).max(0.0);
    let mut window_sn = if window_start == 0.0 { Some(state.sn.clone()) } else { None };
    let row = |state: &TwoPhaseState| {
        let s = source_zone_stats(&state.sn, materials, grid, fluids, cfg.pool_threshold);
        SeriesRow {
            time: state.time,
            mass: s.total_mass,
            injected: state.injected,
            pool_fraction: s.pool_fraction,
            ganglia_fraction: s.ganglia_fraction,
            upper_fraction: s.upper_fraction,
            lower_fraction: s.lower_fraction,
        }
    };
    series.push(row(&state));
    for t in stop_times(cfg) {
        advance(&problem, &mut state, t)?;
        if (t - window_start).abs() < 1e-6 {
            window_sn = Some(state.sn.clone());
        }
        if cfg.snapshot_times.iter().any(|s| (s - t).abs() < 1e-6) {
            snapshots.push((t, state.sn.clone()));
        }
        if (t / cfg.series_interval - (t / cfg.series_interval).round()).abs() < 1e-9 || t == cfg.duration {
            series.push(row(&state));
        }
        progress(&state);
    }
    let final_window_change = window_sn
        .map(|w| w.iter().zip(&state.sn).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .unwrap_or(0.0);
    let mass = napl_mass(grid, materials, fluids, &state.sn);
    let mass_balance_error = if state.injected > 0.0 {
        (mass + state.outflow - state.injected).abs() / state.injected
    } else {
        mass.abs()
    };
    let stats = source_zone_stats(&state.sn, materials, grid, fluids, cfg.pool_threshold);
    Ok(Stage1Output { state, snapshots, series, stats, final_window_change, mass_balance_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{assign_lithology, MaterialProps};

    #[test]
    fn strip_injects_expected_mass() {
        let geometry = GeometryConfig::default();
        let grid = geometry.build_grid().unwrap();
        let fluids = FluidProps::default();
        let src = strip_source(&grid, &geometry, 0.001, &fluids);
        let mass = src.iter().sum::<f64>() * fluids.rho_n * 35.0 * SECONDS_PER_DAY;
        assert!((mass - 6048.0).abs() < 1e-9);
    }

    #[test]
    fn zero_infiltration_keeps_domain_clean() {
        let geometry = GeometryConfig { width: 4.0, height: 2.0, dx: 0.5, dy: 0.5, layer_split: 1.0, lenses: vec![], strip_center: 2.0, strip_width: 1.0, wells: vec![] };
        let grid = geometry.build_grid().unwrap();
        let mats = assign_lithology(&grid, &geometry, [MaterialProps::upper_sand(), MaterialProps::lower_sand(), MaterialProps::clay()]).unwrap();
        let cfg = Stage1Config {
            infiltration_flux: 0.0,
            infiltration_duration: 2.0 * SECONDS_PER_DAY,
            duration: 4.0 * SECONDS_PER_DAY,
            water_table_head: 2.0,
            snapshot_times: vec![SECONDS_PER_DAY],
            static_window: SECONDS_PER_DAY,
            ..Stage1Config::default()
        };
        let out = run_stage1(&grid, &mats, &geometry, &FluidProps::default(), &cfg, |_| {}).unwrap();
        assert!(out.state.sn.iter().all(|&s| s == 0.0));
        assert_eq!(out.final_window_change, 0.0);
        // hydrostatic water stays put
        let p0 = hydrostatic_pressure(&grid, 2.0, &FluidProps::default());
        for (a, b) in out.state.pw.iter().zip(&p0) {
            assert!((a - b).abs() < 1e-6 * b.abs().max(1.0));
        }
    }

    #[test]
    fn injected_mass_grows_linearly_and_is_conserved() {
        let geometry = GeometryConfig { width: 4.0, height: 2.0, dx: 0.25, dy: 0.25, layer_split: 1.0, lenses: vec![], strip_center: 2.0, strip_width: 0.5, wells: vec![] };
        let grid = geometry.build_grid().unwrap();
        let mats = assign_lithology(&grid, &geometry, [MaterialProps::upper_sand(), MaterialProps::lower_sand(), MaterialProps::clay()]).unwrap();
        let fluids = FluidProps::default();
        let cfg = Stage1Config { duration: SECONDS_PER_DAY, infiltration_duration: SECONDS_PER_DAY, water_table_head: 2.0, snapshot_times: vec![], static_window: 0.0, series_interval: SECONDS_PER_DAY / 4.0, ..Stage1Config::default() };
        let out = run_stage1(&grid, &mats, &geometry, &fluids, &cfg, |_| {}).unwrap();
        let rate = 0.001 * 0.5;
        for row in &out.series {
            assert!((row.injected - rate * row.time).abs() < 1e-9 * (rate * row.time).max(1.0));
            assert!((row.mass - row.injected).abs() < 1e-9 * row.injected.max(1.0));
        }
        assert!(out.mass_balance_error < 1e-10);
    }
}
