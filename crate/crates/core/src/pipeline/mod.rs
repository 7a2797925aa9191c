//! Stage orchestration: scenario construction, checkpoint handoff, audits
//! and output files.

pub mod audit;
pub mod checkpoint;
pub mod config;
pub mod export;

pub use audit::{mass_balance_report, AuditReport, Totals};
pub use checkpoint::{checkpoint_path, read_checkpoint, read_manifest, write_checkpoint, Manifest};
pub use config::{FieldImport, RunConfig};
pub use export::{export_fields, export_snapshot, ExportFormat};

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::{assign_lithology, locate_well_cells, Grid, Lithology, MaterialMap, WellSpec};
use crate::nzvi::{run_stage3, Stage3Output};
use crate::randfield::{generate_log_normal_field, import_field, read_samples};
use crate::reaction::{run_stage4, Stage4Output};
use crate::solute::{probe, run_stage2, Stage2Output};
use crate::state::{SimState, StageId};
use crate::twophase::stage1::hydrostatic_pressure;
use crate::twophase::{run_stage1, source_zone_stats, Stage1Output};
use crate::units::{SECONDS_PER_DAY, SECONDS_PER_HOUR};

/// Ledger key holding the monitoring-well concentration just before injection.
pub const LEDGER_PRE_INJECTION: &str = "monitor.pre_injection";

/// Grid, materials and well cells derived deterministically from a config.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub grid: Grid,
    pub materials: MaterialMap,
    pub injection: WellSpec,
    pub injection_cells: Vec<usize>,
    pub monitor_cells: Vec<usize>,
}

impl Scenario {
    pub fn build(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.geometry.build_grid()?;
        let mut materials = assign_lithology(&grid, &cfg.geometry, cfg.materials)?;
        let k = match &cfg.field_import {
            None => generate_log_normal_field(&grid, &materials, &cfg.field)?,
            Some(imp) => {
                let file = File::open(&imp.path)
                    .map_err(|e| Error::input(format!("cannot open {}: {e}", imp.path.display())))?;
                let samples = read_samples(BufReader::new(file))?;
                let values = import_field(&grid, &samples, imp.mode)?;
                if values.iter().any(|v| !(*v > 0.0)) {
                    return Err(Error::input("imported permeability must be positive"));
                }
                let clay = materials.props[Lithology::Clay as usize].k_mean;
                values
                    .iter()
                    .zip(&materials.lithology)
                    .map(|(&v, &l)| if l == Lithology::Clay { clay } else { v })
                    .collect()
            }
        };
        materials.k = k;
        let injection = cfg.geometry.injection_well().cloned().ok_or_else(|| Error::config("no injection well"))?;
        let injection_cells = locate_well_cells(&grid, &injection)?;
        let monitor_cells = match cfg.geometry.monitoring_well() {
            Some(w) => locate_well_cells(&grid, w)?,
            None => Vec::new(),
        };
        Ok(Scenario { grid, materials, injection, injection_cells, monitor_cells })
    }

    /// TCE-free hydrostatic state at the Stage 1 water table.
    pub fn initial_state(&self, cfg: &RunConfig) -> SimState {
        let n = self.grid.num_cells();
        let mut s = SimState::blank(n, self.materials.porosity_field(), self.materials.k.clone());
        s.pw = hydrostatic_pressure(&self.grid, cfg.stage1.water_table_head, &cfg.fluids);
        s
    }
}

#[derive(Debug)]
pub enum StageOutput {
    One(Stage1Output),
    Two(Stage2Output),
    Three(Stage3Output),
    Four(Stage4Output),
}

/// Runs one stage on `state` in place.
pub fn run_stage(cfg: &RunConfig, scn: &Scenario, stage: StageId, state: &mut SimState) -> Result<StageOutput> {
    if state.stage + 1 != stage {
        return Err(Error::Checkpoint(format!("stage {stage} cannot start from a stage {} state", state.stage)));
    }
    let (grid, mats, fluids) = (&scn.grid, &scn.materials, &cfg.fluids);
    Ok(match stage {
        1 => {
            let out = run_stage1(grid, mats, &cfg.geometry, fluids, &cfg.stage1, |s| {
                log::info!("stage 1: t = {:.1} d, injected {:.1} kg", s.time / SECONDS_PER_DAY, s.injected);
            })?;
            state.sn.clone_from(&out.state.sn);
            state.pw.clone_from(&out.state.pw);
            state.sync_water_saturation();
            state.clock = out.state.time;
            state.add_ledger(audit::LEDGER_TCE_INJECTED, out.state.injected);
            state.add_ledger(audit::LEDGER_NAPL_OUTFLOW, out.state.outflow);
            state.stage = 1;
            StageOutput::One(out)
        }
        2 => StageOutput::Two(run_stage2(grid, mats, fluids, &cfg.stage2, &scn.monitor_cells, state)?),
        3 => {
            state.ledger.insert(LEDGER_PRE_INJECTION.to_string(), probe(&state.c_tce, &scn.monitor_cells));
            StageOutput::Three(run_stage3(grid, mats, fluids, &cfg.stage3, &scn.injection, &scn.injection_cells, state)?)
        }
        4 => StageOutput::Four(run_stage4(grid, mats, fluids, &cfg.stage4, &scn.monitor_cells, state)?),
        _ => return Err(Error::input(format!("no stage {stage}"))),
    })
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Where the prerequisite checkpoint is looked up; defaults to `out_dir`.
    pub checkpoint_dir: Option<PathBuf>,
    pub export: Option<ExportFormat>,
    pub stages: Vec<StageId>,
}

/// `1`..`4` or `all`.
pub fn parse_stage_selection(s: &str) -> Result<Vec<StageId>> {
    match s {
        "all" => Ok(vec![1, 2, 3, 4]),
        "1" | "2" | "3" | "4" => Ok(vec![s.parse().expect("digit")]),
        other => Err(Error::input(format!("unknown stage `{other}`; expected 1, 2, 3, 4 or all"))),
    }
}

#[derive(Clone, Debug)]
pub struct StageSummary {
    pub stage: StageId,
    pub checkpoint: PathBuf,
    pub closure: f64,
}

/// Loads the checkpoint a stage starts from and checks it fits the scenario.
pub fn load_prerequisite(dir: &Path, stage: StageId, grid: &Grid, cfg: &RunConfig) -> Result<SimState> {
    let path = checkpoint_path(dir, stage - 1);
    if !path.exists() {
        return Err(Error::MissingCheckpoint(path));
    }
    let (m, state) = read_checkpoint(&path)?;
    if m.stage != stage - 1 {
        return Err(Error::Checkpoint(format!("{} holds stage {}, expected {}", path.display(), m.stage, stage - 1)));
    }
    if (m.nx, m.ny) != (grid.nx, grid.ny) {
        return Err(Error::Checkpoint(format!(
            "{} is {}x{} but the configured grid is {}x{}",
            path.display(),
            m.nx,
            m.ny,
            grid.nx,
            grid.ny
        )));
    }
    if m.seed != cfg.seed {
        log::warn!("checkpoint seed {} differs from configured seed {}", m.seed, cfg.seed);
    }
    if m.config_hash != cfg.hash() {
        log::warn!("checkpoint {} was written with a different configuration", path.display());
    }
    Ok(state)
}

/// Runs the selected stages, writing checkpoints, audits, series and
/// optional field exports into `opts.out_dir`.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<Vec<StageSummary>> {
    let stages = &opts.stages;
    if stages.is_empty() || stages.windows(2).any(|w| w[1] != w[0] + 1) || stages.iter().any(|s| !(1..=4).contains(s)) {
        return Err(Error::input(format!("stage list {stages:?} is not a contiguous range within 1..=4")));
    }
    let scn = Scenario::build(cfg)?;
    std::fs::create_dir_all(&opts.out_dir)?;
    let first = stages[0];
    let mut state = if first == 1 {
        scn.initial_state(cfg)
    } else {
        let dir = opts.checkpoint_dir.as_deref().unwrap_or(&opts.out_dir);
        load_prerequisite(dir, first, &scn.grid, cfg)?
    };
    let hash = cfg.hash();
    let dims = (scn.grid.nx, scn.grid.ny);
    let mut summaries = Vec::new();
    for &stage in stages {
        log::info!("stage {stage}: starting at t = {:.3} d", state.clock / SECONDS_PER_DAY);
        let before = state.clone();
        let output = run_stage(cfg, &scn, stage, &mut state)?;
        let ckpt = checkpoint_path(&opts.out_dir, stage);
        write_checkpoint(&ckpt, &state, dims, cfg.seed, &hash)?;
        write_outputs(&opts.out_dir, &scn, cfg, &output)?;
        let report = mass_balance_report(stage, &before, &state, &cfg.fluids, scn.grid.cell_volume());
        std::fs::write(opts.out_dir.join(format!("audit_stage{stage}.txt")), report.render(cfg.audit_tolerance))?;
        if let Some(fmt) = opts.export {
            export_stage_snapshots(&opts.out_dir, &scn.grid, &state, &output, fmt)?;
        }
        log::info!("stage {stage}: done, audit closure {:.5}%", 100.0 * report.closure());
        report.check(cfg.audit_tolerance)?;
        summaries.push(StageSummary { stage, checkpoint: ckpt, closure: report.closure() });
    }
    Ok(summaries)
}

fn csv(header: &str, rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

fn write_outputs(dir: &Path, scn: &Scenario, cfg: &RunConfig, output: &StageOutput) -> Result<()> {
    let d = SECONDS_PER_DAY;
    let mut summary = String::new();
    let (series, stage) = match output {
        StageOutput::One(o) => {
            let stats = source_zone_stats(&o.state.sn, &scn.materials, &scn.grid, &cfg.fluids, cfg.stage1.pool_threshold);
            let _ = writeln!(summary, "total_mass = {:e}", stats.total_mass);
            let _ = writeln!(summary, "injected = {:e}", o.state.injected);
            let _ = writeln!(summary, "lateral_outflow = {:e}", o.state.outflow);
            let _ = writeln!(summary, "mass_balance_error = {:e}", o.mass_balance_error);
            let _ = writeln!(summary, "pool_fraction = {:e}", stats.pool_fraction);
            let _ = writeln!(summary, "upper_fraction = {:e}", stats.upper_fraction);
            let _ = writeln!(summary, "final_window_change = {:e}", o.final_window_change);
            let _ = writeln!(summary, "steps = {}", o.state.steps);
            let _ = writeln!(summary, "pressure_solves = {}", o.state.pressure_solves);
            for (i, p) in stats.pools.iter().enumerate() {
                let _ = writeln!(
                    summary,
                    "pool{i} = cells {} mass {:e} max_sn {:e} on_clay {} on_bedrock {}",
                    p.cells.len(),
                    p.mass,
                    p.max_sn,
                    p.on_clay,
                    p.on_bedrock
                );
            }
            let rows = o.series.iter().map(|r| {
                vec![r.time / d, r.mass, r.injected, r.pool_fraction, r.ganglia_fraction, r.upper_fraction, r.lower_fraction]
            });
            (csv("time_d,napl_mass,injected,pool_fraction,ganglia_fraction,upper_fraction,lower_fraction", rows), 1)
        }
        StageOutput::Two(o) => {
            let _ = writeln!(summary, "initial = {:e}", o.audit.initial);
            let _ = writeln!(summary, "final_stored = {:e}", o.audit.final_stored);
            let _ = writeln!(summary, "net_outflow = {:e}", o.audit.net_outflow);
            let _ = writeln!(summary, "closure = {:e}", o.audit.closure);
            if let Some(last) = o.series.last() {
                let _ = writeln!(summary, "undissolved_fraction = {:e}", last.undissolved_fraction);
            }
            let rows = o.series.iter().map(|r| {
                vec![r.time / d, r.napl_mass, r.undissolved_fraction, r.aqueous_mass, r.outflow, r.probe, r.source_ratio_min]
            });
            (csv("time_d,napl_mass,undissolved_fraction,aqueous_mass,net_outflow,monitor_c,source_ratio_min", rows), 2)
        }
        StageOutput::Three(o) => {
            let _ = writeln!(summary, "roi_upper = {:e}", o.roi.upper);
            let _ = writeln!(summary, "roi_lower = {:e}", o.roi.lower);
            let _ = writeln!(summary, "max_s_bulk = {:e}", o.max_s_bulk);
            let _ = writeln!(summary, "max_dk_fraction = {:e}", o.max_dk_fraction);
            let _ = writeln!(summary, "max_dtheta_fraction = {:e}", o.max_dtheta_fraction);
            let _ = writeln!(summary, "nzvi_closure = {:e}", o.nzvi_closure);
            let _ = writeln!(summary, "upgradient_flux_before = {:e}", o.upgradient_flux_before);
            let _ = writeln!(summary, "upgradient_flux_during = {:e}", o.upgradient_flux_during);
            let _ = writeln!(summary, "flow_reversed = {}", o.flow_reversed);
            let _ = writeln!(summary, "min_retention_increment = {:e}", o.min_retention_increment);
            let _ = writeln!(summary, "steps = {}", o.steps);
            let rows = o.snapshots.iter().map(|s| {
                let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
                vec![s.time / SECONDS_PER_HOUR, s.roi.upper, s.roi.lower, max(&s.s_bulk), max(&s.dk_percent), max(&s.dtheta_percent)]
            });
            (csv("time_h,roi_upper_m,roi_lower_m,max_s_bulk,max_dk_percent,max_dtheta_percent", rows), 3)
        }
        StageOutput::Four(o) => {
            let _ = writeln!(summary, "initial_iron = {:e}", o.initial_iron);
            let _ = writeln!(summary, "stoichiometric_ratio = {:e}", o.stoichiometric_ratio);
            let _ = writeln!(summary, "tce_closure = {:e}", o.tce_closure);
            let rows = o.series.iter().map(|r| {
                vec![
                    r.time / d,
                    r.unreacted_fraction,
                    r.tce_degraded,
                    r.iron_consumed,
                    r.probe,
                    r.napl_mass,
                    r.aqueous_mass,
                    r.outflow,
                ]
            });
            (
                csv("time_d,unreacted_fraction,tce_degraded,iron_consumed,monitor_c,napl_mass,aqueous_mass,net_outflow", rows),
                4,
            )
        }
    };
    std::fs::write(dir.join(format!("stage{stage}_series.csv")), series)?;
    std::fs::write(dir.join(format!("stage{stage}_summary.txt")), summary)?;
    Ok(())
}

fn export_stage_snapshots(dir: &Path, grid: &Grid, state: &SimState, output: &StageOutput, fmt: ExportFormat) -> Result<()> {
    let sub = dir.join("snapshots");
    let ext = fmt.extension();
    let stage = state.stage;
    export_snapshot(grid, state, fmt, &sub.join(format!("stage{stage}_final.{ext}")))?;
    let write = |label: String, fields: &[(&str, &[f64])]| -> Result<()> {
        export_fields(grid, fields, fmt, &format!("stage {stage} {label}"), &sub.join(format!("stage{stage}_{label}.{ext}")))
    };
    match output {
        StageOutput::One(o) => {
            for (t, sn) in &o.snapshots {
                write(format!("{:.0}d", t / SECONDS_PER_DAY), &[("Sn", sn)])?;
            }
        }
        StageOutput::Two(o) => {
            for (t, c) in &o.snapshots {
                write(format!("{:.2}y", t / crate::units::SECONDS_PER_YEAR), &[("c_tce", c)])?;
            }
        }
        StageOutput::Three(o) => {
            for s in &o.snapshots {
                write(
                    format!("{:.0}h", s.time / SECONDS_PER_HOUR),
                    &[
                        ("s_bulk", &s.s_bulk),
                        ("c_nzvi", &s.c_nzvi),
                        ("c_cmc", &s.c_cmc),
                        ("viscosity", &s.viscosity),
                        ("dk_percent", &s.dk_percent),
                        ("dtheta_percent", &s.dtheta_percent),
                        ("c_tce", &s.c_tce),
                    ],
                )?;
            }
        }
        StageOutput::Four(o) => {
            for (t, c) in &o.snapshots {
                write(format!("{:.1}d", t / SECONDS_PER_DAY), &[("c_tce", c)])?;
            }
        }
    }
    Ok(())
}
