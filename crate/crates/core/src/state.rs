//! Field state handed from one stage to the next.

use std::collections::BTreeMap;

/// Stage number of a state (0 before Stage 1).
pub type StageId = u8;

pub const FIELD_NAMES: [&str; 10] =
    ["Sw", "Sn", "pw", "c_tce", "c_cmc", "c_nzvi", "s_bulk", "rho_m", "theta_m", "k"];

#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub stage: StageId,
    /// Simulation clock since the start of Stage 1, s.
    pub clock: f64,
    pub sw: Vec<f64>,
    pub sn: Vec<f64>,
    pub pw: Vec<f64>,
    /// Aqueous TCE, kg/m³ of water.
    pub c_tce: Vec<f64>,
    pub c_cmc: Vec<f64>,
    /// Aqueous nZVI, kg/m³ of water.
    pub c_nzvi: Vec<f64>,
    /// Deposited nZVI, kg/m³ of bulk.
    pub s_bulk: Vec<f64>,
    /// Active iron, kg/m³ of water.
    pub rho_m: Vec<f64>,
    pub theta_m: Vec<f64>,
    pub k: Vec<f64>,
    /// Named scalar totals carried between stages (cumulative mass terms).
    pub ledger: BTreeMap<String, f64>,
}

impl SimState {
    /// TCE-free, hydrostatic-free placeholder state over `n` cells.
    pub fn blank(n: usize, porosity: Vec<f64>, k: Vec<f64>) -> Self {
        SimState {
            stage: 0,
            clock: 0.0,
            sw: vec![1.0; n],
            sn: vec![0.0; n],
            pw: vec![0.0; n],
            c_tce: vec![0.0; n],
            c_cmc: vec![0.0; n],
            c_nzvi: vec![0.0; n],
            s_bulk: vec![0.0; n],
            rho_m: vec![0.0; n],
            theta_m: porosity,
            k,
            ledger: BTreeMap::new(),
        }
    }

    pub fn num_cells(&self) -> usize {
        self.sn.len()
    }

    pub fn fields(&self) -> [(&'static str, &Vec<f64>); 10] {
        [
            ("Sw", &self.sw),
            ("Sn", &self.sn),
            ("pw", &self.pw),
            ("c_tce", &self.c_tce),
            ("c_cmc", &self.c_cmc),
            ("c_nzvi", &self.c_nzvi),
            ("s_bulk", &self.s_bulk),
            ("rho_m", &self.rho_m),
            ("theta_m", &self.theta_m),
            ("k", &self.k),
        ]
    }

    pub fn field_mut(&mut self, name: &str) -> Option<&mut Vec<f64>> {
        Some(match name {
            "Sw" => &mut self.sw,
            "Sn" => &mut self.sn,
            "pw" => &mut self.pw,
            "c_tce" => &mut self.c_tce,
            "c_cmc" => &mut self.c_cmc,
            "c_nzvi" => &mut self.c_nzvi,
            "s_bulk" => &mut self.s_bulk,
            "rho_m" => &mut self.rho_m,
            "theta_m" => &mut self.theta_m,
            "k" => &mut self.k,
            _ => return None,
        })
    }

    pub fn ledger_value(&self, key: &str) -> f64 {
        self.ledger.get(key).copied().unwrap_or(0.0)
    }

    pub fn add_ledger(&mut self, key: &str, delta: f64) {
        *self.ledger.entry(key.to_string()).or_insert(0.0) += delta;
    }

    /// Keeps `Sw = 1 - Sn` exactly.
    pub fn sync_water_saturation(&mut self) {
        for (w, n) in self.sw.iter_mut().zip(&self.sn) {
            *w = 1.0 - n;
        }
    }
}
