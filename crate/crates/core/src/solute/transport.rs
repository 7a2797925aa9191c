//! Explicit finite-volume advection–dispersion on a fixed flow field.
//!
//! `θ ∂c/∂t + ∇·(q c) − ∇·(D ∇c) = sources`, first-order upwind advection,
//! scalar dispersion `D = Dd + αL |q|` with `|q|` the cell Darcy speed and
//! face values the arithmetic mean of the two cells.

use crate::error::{Error, Result};
use crate::flow::FlowField;
use crate::grid::{BoundaryTag, Grid};

/// Fraction of the positivity bound used for each explicit step.
pub const TRANSPORT_SAFETY: f64 = 0.9;
const NEGATIVE_TRAP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransportParams {
    /// Molecular diffusion, m²/s.
    pub diffusion: f64,
    /// Longitudinal dispersivity, m.
    pub dispersivity: f64,
}

impl Default for TransportParams {
    fn default() -> Self {
        TransportParams { diffusion: 1e-8, dispersivity: 0.02 }
    }
}

impl TransportParams {
    pub fn validate(&self) -> Result<()> {
        if self.diffusion >= 0.0 && self.dispersivity >= 0.0 {
            Ok(())
        } else {
            Err(Error::config(format!("transport coefficients must be non-negative: {self:?}")))
        }
    }
}

/// Concentration entering through a boundary face with inflow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InflowBC {
    /// Inflowing water carries the adjacent cell's concentration.
    ZeroGradient,
    /// Inflowing water has a fixed concentration; dispersion acts across the face.
    Fixed(f64),
}

/// Cumulative boundary and well exchange of one species, kg per m thickness.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ExchangeLedger {
    pub boundary_in: f64,
    pub boundary_out: f64,
    pub well_in: f64,
}

/// Face coefficients for one flow field and porosity field.
#[derive(Clone, Debug)]
pub struct TransportOperator {
    /// Volumetric discharge along each face normal, m³/s per m.
    discharge: Vec<f64>,
    /// Dispersive conductance `D A / d`, m³/s per m.
    conductance: Vec<f64>,
    /// Water storage `θ V` per cell, m³ per m.
    storage: Vec<f64>,
    /// Well inflow per cell (m³/s per m), from the flow source term.
    well_rate: Vec<f64>,
    lateral: Vec<bool>,
    stable_dt: f64,
}

impl TransportOperator {
    pub fn new(grid: &Grid, flow: &FlowField, theta: &[f64], params: &TransportParams) -> Result<Self> {
        let n = grid.num_cells();
        if theta.len() != n || flow.speed.len() != n {
            return Err(Error::input("transport fields do not match the grid"));
        }
        if let Some(c) = theta.iter().position(|t| !(*t > 0.0)) {
            return Err(Error::input(format!("non-positive porosity in cell {c}")));
        }
        let v = grid.cell_volume();
        let storage: Vec<f64> = theta.iter().map(|t| t * v).collect();
        let disp: Vec<f64> = flow.speed.iter().map(|q| params.diffusion + params.dispersivity * q).collect();
        let mut discharge = vec![0.0; grid.faces.len()];
        let mut conductance = vec![0.0; grid.faces.len()];
        let mut lateral = vec![false; grid.faces.len()];
        let mut out_rate = vec![0.0; n];
        for (f, face) in grid.faces.iter().enumerate() {
            let q = flow.discharge(grid, f);
            match face.neighbor {
                Some(nb) => {
                    discharge[f] = q;
                    let g = 0.5 * (disp[face.owner] + disp[nb]) * face.area / face.distance;
                    conductance[f] = g;
                    if q > 0.0 {
                        out_rate[face.owner] += q;
                    } else {
                        out_rate[nb] -= q;
                    }
                    out_rate[face.owner] += g;
                    out_rate[nb] += g;
                }
                None => {
                    if matches!(face.boundary, Some(BoundaryTag::Left) | Some(BoundaryTag::Right)) {
                        lateral[f] = true;
                        discharge[f] = q;
                        conductance[f] = disp[face.owner] * face.area / face.distance;
                        if q > 0.0 {
                            out_rate[face.owner] += q;
                        }
                        // only a fixed inflow concentration uses the boundary conductance
                        out_rate[face.owner] += conductance[f];
                    }
                }
            }
        }
        let well_rate: Vec<f64> = flow.source.iter().map(|s| s.max(0.0)).collect();
        for (c, s) in flow.source.iter().enumerate() {
            if *s < 0.0 {
                out_rate[c] -= s;
            }
        }
        let stable_dt = (0..n)
            .filter(|&c| out_rate[c] > 0.0)
            .map(|c| TRANSPORT_SAFETY * storage[c] / out_rate[c])
            .fold(f64::INFINITY, f64::min);
        Ok(TransportOperator { discharge, conductance, storage, well_rate, lateral, stable_dt })
    }

    /// Largest explicit step keeping every update a convex combination.
    pub fn stable_dt(&self) -> f64 {
        self.stable_dt
    }

    pub fn storage(&self) -> &[f64] {
        &self.storage
    }

    /// Mass held in solution, `Σ θ V c`.
    pub fn mass(&self, c: &[f64]) -> f64 {
        self.storage.iter().zip(c).map(|(s, c)| s * c).sum()
    }

    /// One explicit step of length `dt <= stable_dt()`. `well_conc` is the
    /// concentration of injected water.
    pub fn step(
        &self,
        grid: &Grid,
        c: &mut [f64],
        dt: f64,
        inflow: InflowBC,
        well_conc: f64,
        ledger: &mut ExchangeLedger,
    ) -> Result<()> {
        if dt > self.stable_dt * (1.0 + 1e-12) {
            return Err(Error::solver(format!(
                "transport step {dt:e} s exceeds the stable step {:e} s",
                self.stable_dt
            )));
        }
        let n = c.len();
        let mut net = vec![0.0; n];
        let (mut b_in, mut b_out) = (0.0, 0.0);
        for (f, face) in grid.faces.iter().enumerate() {
            let q = self.discharge[f];
            let g = self.conductance[f];
            let o = face.owner;
            match face.neighbor {
                Some(nb) => {
                    let adv = if q > 0.0 { q * c[o] } else { q * c[nb] };
                    let flux = adv - g * (c[nb] - c[o]);
                    net[o] -= flux;
                    net[nb] += flux;
                }
                None if self.lateral[f] => {
                    // dispersion across an outflow face is zero-gradient
                    let flux = if q > 0.0 {
                        q * c[o]
                    } else {
                        match inflow {
                            InflowBC::ZeroGradient => q * c[o],
                            InflowBC::Fixed(cb) => q * cb - g * (cb - c[o]),
                        }
                    };
                    net[o] -= flux;
                    if flux > 0.0 {
                        b_out += flux;
                    } else {
                        b_in -= flux;
                    }
                }
                None => {}
            }
        }
        let mut w_in = 0.0;
        for cell in 0..n {
            let w = self.well_rate[cell];
            if w > 0.0 {
                net[cell] += w * well_conc;
                w_in += w * well_conc;
            }
        }
        let mut worst: f64 = 0.0;
        for cell in 0..n {
            let v = c[cell] + dt * net[cell] / self.storage[cell];
            if v < 0.0 {
                worst = worst.min(v);
                c[cell] = 0.0;
            } else {
                c[cell] = v;
            }
        }
        if worst < -NEGATIVE_TRAP {
            return Err(Error::solver(format!("negative concentration {worst:e} after transport")));
        }
        ledger.boundary_in += dt * b_in;
        ledger.boundary_out += dt * b_out;
        ledger.well_in += dt * w_in;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{solve_pressure, FlowBC};
    use crate::grid::build_grid;
    use crate::twophase::FluidProps;

    fn column(n: usize, head_drop: f64) -> (Grid, FlowField) {
        let grid = build_grid((1.0, 0.1), (1.0 / n as f64, 0.1)).unwrap();
        let cells = grid.num_cells();
        let flow = solve_pressure(&grid, &vec![1e-11; cells], &vec![1e-3; cells], &FluidProps::default(), &FlowBC::heads(12.0 + head_drop, 12.0)).unwrap();
        (grid, flow)
    }

    #[test]
    fn pulse_mass_is_conserved_without_dispersion() {
        let (grid, flow) = column(100, 0.1);
        let op = TransportOperator::new(&grid, &flow, &vec![0.3; 100], &TransportParams { diffusion: 0.0, dispersivity: 0.0 }).unwrap();
        let mut c = vec![0.0; 100];
        for v in &mut c[10..20] {
            *v = 1.0;
        }
        let m0 = op.mass(&c);
        let mut ledger = ExchangeLedger::default();
        let dt = op.stable_dt();
        for _ in 0..50 {
            op.step(&grid, &mut c, dt, InflowBC::Fixed(0.0), 0.0, &mut ledger).unwrap();
        }
        assert!((op.mass(&c) - m0).abs() < 1e-12 * m0);
        assert_eq!(ledger.boundary_out, 0.0);
        // centre of mass moved by q t / θ
        let q = flow.face_flux[0].abs();
        let com = |c: &[f64]| c.iter().enumerate().map(|(i, v)| v * (i as f64 + 0.5) * 0.01).sum::<f64>() / c.iter().sum::<f64>();
        let mut c0 = vec![0.0; 100];
        for v in &mut c0[10..20] {
            *v = 1.0;
        }
        let shift = com(&c) - com(&c0);
        assert!((shift - q * 50.0 * dt / 0.3).abs() < 1e-9);
    }

    #[test]
    fn pure_diffusion_conserves_mass() {
        let grid = build_grid((1.0, 0.1), (0.02, 0.1)).unwrap();
        let flow = crate::flow::hydrostatic_state(&grid, 12.0, &FluidProps::default());
        let op = TransportOperator::new(&grid, &flow, &vec![0.4; 50], &TransportParams { diffusion: 1e-8, dispersivity: 0.0 }).unwrap();
        let mut c: Vec<f64> = (0..50).map(|i| if i == 25 { 1.0 } else { 0.0 }).collect();
        let m0 = op.mass(&c);
        let mut ledger = ExchangeLedger::default();
        for _ in 0..200 {
            op.step(&grid, &mut c, op.stable_dt(), InflowBC::ZeroGradient, 0.0, &mut ledger).unwrap();
        }
        assert!((op.mass(&c) - m0).abs() < 1e-12 * m0);
        assert!(c.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn oversized_step_is_rejected() {
        let (grid, flow) = column(10, 0.1);
        let op = TransportOperator::new(&grid, &flow, &[0.3; 10], &TransportParams::default()).unwrap();
        let mut c = vec![0.0; 10];
        let mut ledger = ExchangeLedger::default();
        assert!(op.step(&grid, &mut c, 2.0 * op.stable_dt(), InflowBC::ZeroGradient, 0.0, &mut ledger).is_err());
    }
}
