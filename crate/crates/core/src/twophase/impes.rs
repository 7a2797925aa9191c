//! Implicit-pressure, explicit-saturation stepping for water and TCE.
//!
//! The pressure unknown is the water pressure. Phase fluxes across a face
//! from cell `i` to `j` are
//! `Fw = T λw (Φw_i - Φw_j)` and `Fn = L T λn (Φn_i - Φn_j)` with
//! `Φw = pw + ρw g y`, `Φn = pw + pc + ρn g y`, geometric transmissibility
//! `T`, phase-potential upwinded mobilities and the entry-pressure switch
//! `L ∈ {0, 1}`.

use rayon::prelude::*;

use super::closure::{self, CellClosure};
use super::FluidProps;
use crate::error::{Error, Result};
use crate::grid::{Grid, MaterialMap};
use crate::linalg::FivePointSystem;

/// Relative residual required of the pressure solve.
pub const PRESSURE_TOLERANCE: f64 = 1e-10;
/// Saturation overshoot tolerated (and clamped) after an explicit update.
const BOUND_SLACK: f64 = 1e-12;
/// Saturation violation treated as a bug rather than a step-size problem.
const BOUND_TRAP: f64 = 1e-9;
const MIN_DT: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct TwoPhaseProblem<'a> {
    pub grid: &'a Grid,
    pub materials: &'a MaterialMap,
    pub fluids: FluidProps,
    /// Boundary faces held at a fixed water pressure, with TCE-free inflow.
    pub dirichlet: Vec<(usize, f64)>,
    /// Volumetric TCE source per cell, m³/s per m thickness.
    pub napl_source: Vec<f64>,
    /// Time after which the source is switched off, s.
    pub source_end: f64,
    pub cfl: f64,
    /// Largest saturation change allowed in a single explicit update.
    pub max_saturation_change: f64,
    pub max_upwind_iterations: usize,
    /// Largest cellwise saturation change tolerated before the pressure is
    /// re-solved; zero re-solves on every saturation step.
    pub pressure_refresh: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoPhaseState {
    pub sn: Vec<f64>,
    pub pw: Vec<f64>,
    /// Simulation clock, s.
    pub time: f64,
    /// TCE mass added by sources, kg.
    pub injected: f64,
    /// TCE mass that left through boundary faces, kg.
    pub outflow: f64,
    pub steps: u64,
    pub pressure_solves: u64,
}

impl TwoPhaseState {
    pub fn new(sn: Vec<f64>, pw: Vec<f64>) -> Self {
        TwoPhaseState { sn, pw, time: 0.0, injected: 0.0, outflow: 0.0, steps: 0, pressure_solves: 0 }
    }

    pub fn sw(&self) -> Vec<f64> {
        self.sn.iter().map(|s| 1.0 - s).collect()
    }

    pub fn capillary_pressure(&self, materials: &MaterialMap) -> Vec<f64> {
        self.sn
            .iter()
            .enumerate()
            .map(|(c, &s)| closure::evaluate(materials.props_of(c), s).pc)
            .collect()
    }

    /// TCE phase pressure `pn = pw + pc`.
    pub fn pn(&self, materials: &MaterialMap) -> Vec<f64> {
        self.capillary_pressure(materials).iter().zip(&self.pw).map(|(pc, pw)| pc + pw).collect()
    }

    /// TCE mass held in the domain, kg.
    pub fn napl_mass(&self, grid: &Grid, materials: &MaterialMap, fluids: &FluidProps) -> f64 {
        napl_mass(grid, materials, fluids, &self.sn)
    }
}

pub fn napl_mass(grid: &Grid, materials: &MaterialMap, fluids: &FluidProps, sn: &[f64]) -> f64 {
    let v = grid.cell_volume();
    sn.iter().enumerate().map(|(c, s)| fluids.rho_n * materials.porosity(c) * s * v).sum()
}

/// Phase fluxes on every face (m³/s per m, positive along the face normal).
#[derive(Clone, Debug)]
pub struct PhaseFluxes {
    pub water: Vec<f64>,
    pub napl: Vec<f64>,
}

struct FaceGeom {
    /// Geometric transmissibility `k A / d`, zero for no-flow faces.
    trans: Vec<f64>,
    /// Boundary water pressure for Dirichlet faces.
    bc_pressure: Vec<Option<f64>>,
    /// Elevation of the far side of each face (neighbour centre or face centre).
    far_y: Vec<f64>,
}

impl FaceGeom {
    fn new(problem: &TwoPhaseProblem) -> Result<Self> {
        let grid = problem.grid;
        let k = &problem.materials.k;
        let nf = grid.faces.len();
        let mut trans = vec![0.0; nf];
        let mut bc_pressure = vec![None; nf];
        let mut far_y = vec![0.0; nf];
        for &(f, p) in &problem.dirichlet {
            let face = grid.faces.get(f).ok_or_else(|| Error::input(format!("face {f} does not exist")))?;
            if face.is_interior() {
                return Err(Error::input(format!("face {f} is not a boundary face")));
            }
            bc_pressure[f] = Some(p);
        }
        for (i, face) in grid.faces.iter().enumerate() {
            match face.neighbor {
                Some(nb) => {
                    let (a, b) = (k[face.owner], k[nb]);
                    trans[i] = 2.0 * a * b / (a + b) * face.area / face.distance;
                    far_y[i] = grid.center(nb).1;
                }
                None => {
                    far_y[i] = grid.center(face.owner).1 + face.normal[1] * face.distance;
                    if bc_pressure[i].is_some() {
                        trans[i] = k[face.owner] * face.area / face.distance;
                    }
                }
            }
        }
        Ok(FaceGeom { trans, bc_pressure, far_y })
    }
}

/// Face state used for upwinding: far-side potentials and closure.
#[derive(Clone, Copy)]
struct Upwind {
    water_from_owner: bool,
    napl_from_owner: bool,
    napl_open: bool,
}

struct Stepper<'p, 'a> {
    problem: &'p TwoPhaseProblem<'a>,
    geom: FaceGeom,
    y: Vec<f64>,
    pore_volume: Vec<f64>,
}

impl<'p, 'a> Stepper<'p, 'a> {
    fn closures(&self, sn: &[f64]) -> Vec<CellClosure> {
        let m = self.problem.materials;
        sn.par_iter().enumerate().map(|(c, &s)| closure::evaluate(m.props_of(c), s)).collect()
    }

    /// Potentials on both sides of a face: `(Φw_owner, Φw_far, Φn_owner, Φn_far)`.
    fn potentials(&self, f: usize, pw: &[f64], cl: &[CellClosure]) -> (f64, f64, f64, f64) {
        let fl = &self.problem.fluids;
        let face = &self.problem.grid.faces[f];
        let o = face.owner;
        let yo = self.y[o];
        let yf = self.geom.far_y[f];
        let (pw_far, pc_far) = match face.neighbor {
            Some(nb) => (pw[nb], cl[nb].pc),
            None => (
                self.geom.bc_pressure[f].unwrap_or(pw[o]),
                self.problem.materials.props_of(o).entry_pressure,
            ),
        };
        (
            pw[o] + fl.rho_w * fl.g * yo,
            pw_far + fl.rho_w * fl.g * yf,
            pw[o] + cl[o].pc + fl.rho_n * fl.g * yo,
            pw_far + pc_far + fl.rho_n * fl.g * yf,
        )
    }

    fn upwind(&self, f: usize, pw: &[f64], cl: &[CellClosure]) -> Upwind {
        let face = &self.problem.grid.faces[f];
        let (wo, wf, no, nf) = self.potentials(f, pw, cl);
        let napl_from_owner = no >= nf;
        let napl_open = match face.neighbor {
            Some(nb) => {
                let m = self.problem.materials;
                let (up, down) = if napl_from_owner { (face.owner, nb) } else { (nb, face.owner) };
                closure::napl_entry_permitted(
                    cl[up].pc,
                    m.props_of(up).entry_pressure,
                    m.props_of(down).entry_pressure,
                )
            }
            None => true,
        };
        Upwind { water_from_owner: wo >= wf, napl_from_owner, napl_open }
    }

    /// Upwinded phase mobilities `(λw, λn)` for a face (λn includes the switch).
    fn mobilities(&self, f: usize, up: Upwind, cl: &[CellClosure]) -> (f64, f64) {
        let fl = &self.problem.fluids;
        let face = &self.problem.grid.faces[f];
        let (krw, krn) = match face.neighbor {
            Some(nb) => {
                let w = if up.water_from_owner { cl[face.owner].krw } else { cl[nb].krw };
                let n = if up.napl_from_owner { cl[face.owner].krn } else { cl[nb].krn };
                (w, n)
            }
            // boundary fluid is TCE-free water
            None => (
                if up.water_from_owner { cl[face.owner].krw } else { 1.0 },
                if up.napl_from_owner { cl[face.owner].krn } else { 0.0 },
            ),
        };
        let lam_n = if up.napl_open { krn / fl.mu_n } else { 0.0 };
        (krw / fl.mu_w, lam_n)
    }

    fn assemble_and_solve(&self, ups: &[Upwind], cl: &[CellClosure], source: &[f64]) -> Result<Vec<f64>> {
        let grid = self.problem.grid;
        let fl = &self.problem.fluids;
        let mut sys = FivePointSystem::new(grid.nx, grid.ny);
        sys.rhs.copy_from_slice(source);
        for (f, face) in grid.faces.iter().enumerate() {
            let t = self.geom.trans[f];
            if t == 0.0 {
                continue;
            }
            let (lw, ln) = self.mobilities(f, ups[f], cl);
            let o = face.owner;
            let dy = self.y[o] - self.geom.far_y[f];
            let (pc_far, far) = match face.neighbor {
                Some(nb) => (cl[nb].pc, Some(nb)),
                None => (self.problem.materials.props_of(o).entry_pressure, None),
            };
            // explicit part of the outflow from the owner
            let g_term = t * (lw * fl.rho_w * fl.g * dy + ln * (cl[o].pc - pc_far + fl.rho_n * fl.g * dy));
            let coef = t * (lw + ln);
            match far {
                Some(nb) => {
                    sys.add_coupling(o, nb, coef);
                    sys.rhs[o] -= g_term;
                    sys.rhs[nb] += g_term;
                }
                None => {
                    let pb = self.geom.bc_pressure[f].expect("transmissive boundary face has a pressure");
                    sys.add_diag(o, coef);
                    sys.rhs[o] += coef * pb - g_term;
                }
            }
        }
        sys.solve(PRESSURE_TOLERANCE)
    }

    fn fluxes(&self, pw: &[f64], cl: &[CellClosure]) -> (PhaseFluxes, Vec<Upwind>) {
        let nf = self.problem.grid.faces.len();
        let mut water = vec![0.0; nf];
        let mut napl = vec![0.0; nf];
        let mut ups = Vec::with_capacity(nf);
        for f in 0..nf {
            let up = self.upwind(f, pw, cl);
            ups.push(up);
            let t = self.geom.trans[f];
            if t == 0.0 {
                continue;
            }
            let (lw, ln) = self.mobilities(f, up, cl);
            let (wo, wf, no, nff) = self.potentials(f, pw, cl);
            water[f] = t * lw * (wo - wf);
            napl[f] = t * ln * (no - nff);
        }
        (PhaseFluxes { water, napl }, ups)
    }

    /// Pressure solve with re-iteration of the upwind directions.
    fn pressure(&self, pw_guess: &[f64], cl: &[CellClosure], source: &[f64], solves: &mut u64) -> Result<(Vec<f64>, PhaseFluxes)> {
        let nf = self.problem.grid.faces.len();
        let mut ups: Vec<Upwind> = (0..nf).map(|f| self.upwind(f, pw_guess, cl)).collect();
        let mut pw = pw_guess.to_vec();
        for _ in 0..=self.problem.max_upwind_iterations {
            pw = self.assemble_and_solve(&ups, cl, source)?;
            *solves += 1;
            let fresh: Vec<Upwind> = (0..nf).map(|f| self.upwind(f, &pw, cl)).collect();
            let same = fresh.iter().zip(&ups).all(|(a, b)| {
                a.water_from_owner == b.water_from_owner
                    && a.napl_from_owner == b.napl_from_owner
                    && a.napl_open == b.napl_open
            });
            ups = fresh;
            if same {
                break;
            }
        }
        let (fluxes, _) = self.fluxes(&pw, cl);
        Ok((pw, fluxes))
    }

    /// Stable explicit step from linearised flux sensitivities.
    fn stable_dt(&self, cl: &[CellClosure], fluxes: &PhaseFluxes, pw: &[f64], source: &[f64]) -> f64 {
        let grid = self.problem.grid;
        let m = self.problem.materials;
        let fl = &self.problem.fluids;
        let n = grid.num_cells();
        let mut rate = vec![0.0; n];
        let mut net = source.to_vec();
        let dpc = |c: usize| {
            let p = m.props_of(c);
            closure::d_pc_d_se(cl[c].se, p.entry_pressure, p.lambda) / (1.0 - p.swr - p.snr)
        };
        let dlam = |c: usize| {
            let p = m.props_of(c);
            closure::d_krn_d_se(cl[c].se, p.lambda).abs() / (1.0 - p.swr - p.snr) / fl.mu_n
        };
        for (f, face) in grid.faces.iter().enumerate() {
            let t = self.geom.trans[f];
            if t == 0.0 {
                continue;
            }
            let up = self.upwind(f, pw, cl);
            if !up.napl_open {
                continue;
            }
            let (_, ln) = self.mobilities(f, up, cl);
            let (_, _, no, nf) = self.potentials(f, pw, cl);
            let o = face.owner;
            let q = fluxes.napl[f];
            net[o] -= q;
            let upwind_cell = match face.neighbor {
                Some(nb) => {
                    net[nb] += q;
                    rate[nb] += t * ln * dpc(nb);
                    if up.napl_from_owner { o } else { nb }
                }
                None => o,
            };
            rate[o] += t * ln * dpc(o);
            if face.neighbor.is_some() || up.napl_from_owner {
                rate[upwind_cell] += t * (no - nf).abs() * dlam(upwind_cell);
            }
        }
        let mut dt = f64::INFINITY;
        for c in 0..n {
            if rate[c] > 0.0 {
                dt = dt.min(self.problem.cfl * self.pore_volume[c] / rate[c]);
            }
            if net[c] != 0.0 {
                dt = dt.min(self.problem.max_saturation_change * self.pore_volume[c] / net[c].abs());
            }
        }
        dt
    }
}

/// Advances `state` to `t_end`, sub-stepping as the stability bound requires.
pub fn advance(problem: &TwoPhaseProblem, state: &mut TwoPhaseState, t_end: f64) -> Result<()> {
    let grid = problem.grid;
    let n = grid.num_cells();
    if state.sn.len() != n || state.pw.len() != n || problem.napl_source.len() != n {
        return Err(Error::input("two-phase state does not match the grid"));
    }
    let geom = FaceGeom::new(problem)?;
    let y: Vec<f64> = (0..n).map(|c| grid.center(c).1).collect();
    let v = grid.cell_volume();
    let pore_volume: Vec<f64> = (0..n).map(|c| problem.materials.porosity(c) * v).collect();
    let stepper = Stepper { problem, geom, y, pore_volume };
    let zero = vec![0.0; n];
    let rho_n = problem.fluids.rho_n;

    // saturation and source switch at the last pressure solve
    let mut solved_at: Option<(Vec<f64>, bool)> = None;
    while state.time < t_end {
        let source_on = state.time < problem.source_end;
        let source = if source_on { &problem.napl_source } else { &zero };
        let cl = stepper.closures(&state.sn);
        let stale = match &solved_at {
            None => true,
            Some((sn0, on)) => {
                *on != source_on
                    || sn0.iter().zip(&state.sn).any(|(a, b)| (a - b).abs() > problem.pressure_refresh)
            }
        };
        let (pw, fluxes) = if stale {
            let solved = stepper.pressure(&state.pw, &cl, source, &mut state.pressure_solves)?;
            solved_at = Some((state.sn.clone(), source_on));
            solved
        } else {
            (state.pw.clone(), stepper.fluxes(&state.pw, &cl).0)
        };
        let mut limit = t_end - state.time;
        if source_on {
            limit = limit.min(problem.source_end - state.time);
        }
        let mut dt = stepper.stable_dt(&cl, &fluxes, &pw, source).min(limit);

        // net TCE inflow rate per cell
        let mut div = source.clone();
        let mut boundary_out = 0.0;
        for (f, face) in grid.faces.iter().enumerate() {
            let q = fluxes.napl[f];
            if q == 0.0 {
                continue;
            }
            div[face.owner] -= q;
            match face.neighbor {
                Some(nb) => div[nb] += q,
                None => boundary_out += q,
            }
        }

        let new_sn = loop {
            let trial: Vec<f64> = (0..n)
                .map(|c| state.sn[c] + dt * div[c] / stepper.pore_volume[c])
                .collect();
            let worst = (0..n)
                .map(|c| {
                    let hi = 1.0 - problem.materials.props_of(c).swr;
                    (-trial[c]).max(trial[c] - hi)
                })
                .fold(f64::NEG_INFINITY, f64::max);
            if worst <= BOUND_SLACK {
                break trial;
            }
            if dt < MIN_DT {
                if worst > BOUND_TRAP {
                    return Err(Error::solver(format!(
                        "TCE saturation left its bounds by {worst:e} at t = {} s with dt = {dt:e} s",
                        state.time
                    )));
                }
                break trial;
            }
            dt *= 0.5;
        };
        let src_total: f64 = source.iter().sum();
        let reached_end = dt >= limit;
        state.sn = new_sn
            .into_iter()
            .enumerate()
            .map(|(c, s)| s.clamp(0.0, 1.0 - problem.materials.props_of(c).swr))
            .collect();
        state.pw = pw;
        state.injected += rho_n * src_total * dt;
        state.outflow += rho_n * boundary_out * dt;
        state.time = if reached_end { state.time + limit } else { state.time + dt };
        if reached_end && (t_end - state.time).abs() <= 1e-9 * t_end.abs().max(1.0) {
            state.time = t_end;
        }
        state.steps += 1;
    }
    Ok(())
}

/// Phase fluxes for the current state (for diagnostics and exports).
pub fn phase_fluxes(problem: &TwoPhaseProblem, state: &TwoPhaseState) -> Result<PhaseFluxes> {
    let grid = problem.grid;
    let n = grid.num_cells();
    let geom = FaceGeom::new(problem)?;
    let y: Vec<f64> = (0..n).map(|c| grid.center(c).1).collect();
    let v = grid.cell_volume();
    let pore_volume = (0..n).map(|c| problem.materials.porosity(c) * v).collect();
    let stepper = Stepper { problem, geom, y, pore_volume };
    let cl = stepper.closures(&state.sn);
    Ok(stepper.fluxes(&state.pw, &cl).0)
}

/// Single explicit IMPES interval of length `dt`, sub-divided automatically.
pub fn impes_step(problem: &TwoPhaseProblem, state: &mut TwoPhaseState, dt: f64) -> Result<()> {
    let end = state.time + dt;
    advance(problem, state, end)
}
