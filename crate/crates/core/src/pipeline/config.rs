//! Run configuration and its sectioned `key = value` text format.
//!
//! ```text
//! [domain]
//! width = 35 m
//! [lens.0]
//! x0 = 9.8 m
//! ```
//!
//! A key inside `[section]` is addressed as `section.key`; `lens[0]` and
//! `lens.0` are equivalent. Physical quantities must carry a unit; unknown
//! or duplicated keys are rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{GeometryConfig, Lithology, MaterialProps, Rect, WellMode, WellSpec};
use crate::nzvi::Stage3Config;
use crate::randfield::{FieldSpec, ImportMode};
use crate::reaction::Stage4Config;
use crate::solute::Stage2Config;
use crate::twophase::{FluidProps, Stage1Config};
use crate::units::{parse_quantity, Dim};

/// External permeability field replacing the generated one.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldImport {
    pub path: PathBuf,
    pub mode: ImportMode,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub geometry: GeometryConfig,
    pub materials: [MaterialProps; 3],
    pub field: FieldSpec,
    pub field_import: Option<FieldImport>,
    pub fluids: FluidProps,
    pub stage1: Stage1Config,
    pub stage2: Stage2Config,
    pub stage3: Stage3Config,
    pub stage4: Stage4Config,
    /// Largest acceptable relative mass-balance residual per stage.
    pub audit_tolerance: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut cfg = RunConfig {
            seed: FieldSpec::default().seed,
            geometry: GeometryConfig::default(),
            materials: [MaterialProps::upper_sand(), MaterialProps::lower_sand(), MaterialProps::clay()],
            field: FieldSpec::default(),
            field_import: None,
            fluids: FluidProps::default(),
            stage1: Stage1Config::default(),
            stage2: Stage2Config::default(),
            stage3: Stage3Config::default(),
            stage4: Stage4Config::default(),
            audit_tolerance: 0.005,
        };
        cfg.synchronise();
        cfg
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let Some(imp) = &mut cfg.field_import {
            if imp.path.is_relative() {
                if let Some(dir) = path.parent() {
                    imp.path = dir.join(&imp.path);
                }
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut reader = Reader::new(text)?;
        let mut cfg = RunConfig::default();
        cfg.apply(&mut reader)?;
        reader.finish()?;
        cfg.synchronise();
        cfg.validate()?;
        Ok(cfg)
    }

    /// Overrides the seed everywhere it is used.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.field.seed = seed;
        self
    }

    /// Copies parameters shared by several stages from their owning section.
    fn synchronise(&mut self) {
        self.field.seed = self.seed;
        let s3 = &mut self.stage3;
        for nat in [&mut self.stage2.natural, &mut self.stage4.natural] {
            nat.transport = s3.transport;
            nat.cmc = s3.cmc;
            nat.left_head = s3.left_head;
            nat.right_head = s3.right_head;
        }
        s3.dissolution.solubility = self.fluids.solubility;
        self.stage2.natural.dissolution = s3.dissolution;
        self.stage4.natural.dissolution = s3.dissolution;
        for w in &mut self.geometry.wells {
            if w.mode == WellMode::Injection {
                w.injection_velocity = s3.nzvi.injection_velocity;
                w.conc_cmc = s3.cmc.concentration;
                w.conc_nzvi = s3.nzvi.concentration;
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        if !(g.width > 0.0 && g.height > 0.0 && g.dx > 0.0 && g.dy > 0.0) {
            return Err(Error::config("domain extent and resolution must be positive"));
        }
        if !(g.strip_width >= 0.0) {
            return Err(Error::config("strip width must be non-negative"));
        }
        for (lith, p) in Lithology::ALL.iter().zip(&self.materials) {
            p.validate(lith.name())?;
        }
        self.field.validate()?;
        self.fluids.validate()?;
        self.stage1.validate()?;
        self.stage2.natural.validate()?;
        self.stage3.validate()?;
        if let Some(k) = &self.stage4.kinetics {
            k.validate()?;
        }
        let durations = [self.stage2.duration, self.stage4.duration];
        if durations.iter().any(|d| !(*d >= 0.0)) {
            return Err(Error::config("stage durations must be non-negative"));
        }
        if !(self.stage2.series_interval > 0.0 && self.stage4.series_interval > 0.0) {
            return Err(Error::config("series intervals must be positive"));
        }
        if g.injection_well().is_none() {
            return Err(Error::config("an injection well is required"));
        }
        if !(self.audit_tolerance > 0.0) {
            return Err(Error::config("audit tolerance must be positive"));
        }
        Ok(())
    }

    /// SHA-256 over the fully resolved configuration, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(format!("{self:?}").as_bytes());
        hex::encode(digest)
    }

    fn apply(&mut self, r: &mut Reader) -> Result<()> {
        r.integer("run.seed", &mut self.seed)?;
        r.qty("run.audit_tolerance", Dim::NONE, &mut self.audit_tolerance)?;

        let g = &mut self.geometry;
        r.qty("domain.width", Dim::LENGTH, &mut g.width)?;
        r.qty("domain.height", Dim::LENGTH, &mut g.height)?;
        r.qty("domain.layer_split", Dim::LENGTH, &mut g.layer_split)?;
        r.qty("domain.strip_center", Dim::LENGTH, &mut g.strip_center)?;
        r.qty("domain.strip_width", Dim::LENGTH, &mut g.strip_width)?;
        r.qty("grid.dx", Dim::LENGTH, &mut g.dx)?;
        r.qty("grid.dy", Dim::LENGTH, &mut g.dy)?;
        let mut lens_count = None;
        r.optional_count("domain.lens_count", &mut lens_count)?;
        let lenses = r.indexed("lens")?;
        if !lenses.is_empty() || lens_count.is_some() {
            g.lenses.clear();
            for i in lenses {
                let p = format!("lens.{i}");
                let mut rect = Rect { x0: f64::NAN, y0: f64::NAN, x1: f64::NAN, y1: f64::NAN };
                r.required(&format!("{p}.x0"), Dim::LENGTH, &mut rect.x0)?;
                r.required(&format!("{p}.y0"), Dim::LENGTH, &mut rect.y0)?;
                r.required(&format!("{p}.x1"), Dim::LENGTH, &mut rect.x1)?;
                r.required(&format!("{p}.y1"), Dim::LENGTH, &mut rect.y1)?;
                g.lenses.push(rect);
            }
            if let Some(n) = lens_count {
                if n != g.lenses.len() {
                    return Err(Error::config(format!("lens_count = {n} but {} lenses are listed", g.lenses.len())));
                }
            }
        }
        let wells = r.indexed("well")?;
        if !wells.is_empty() {
            g.wells.clear();
            for i in wells {
                let p = format!("well.{i}");
                let mut w = WellSpec::monitoring(&format!("well{i}"), f64::NAN, f64::NAN);
                r.string(&format!("{p}.name"), &mut w.name)?;
                r.required(&format!("{p}.x"), Dim::LENGTH, &mut w.x)?;
                r.required(&format!("{p}.depth"), Dim::LENGTH, &mut w.depth)?;
                r.qty(&format!("{p}.screen_len"), Dim::LENGTH, &mut w.screen_len)?;
                let mut mode = String::from("monitoring");
                r.string(&format!("{p}.mode"), &mut mode)?;
                w.mode = match mode.as_str() {
                    "injection" => WellMode::Injection,
                    "monitoring" => WellMode::Monitoring,
                    other => return Err(Error::config(format!("{p}.mode: unknown well mode `{other}`"))),
                };
                g.wells.push(w);
            }
        }

        for (lith, props) in Lithology::ALL.iter().zip(self.materials.iter_mut()) {
            let p = lith.name();
            r.qty(&format!("{p}.permeability"), Dim::AREA, &mut props.k_mean)?;
            r.qty(&format!("{p}.porosity"), Dim::NONE, &mut props.porosity)?;
            r.qty(&format!("{p}.swr"), Dim::NONE, &mut props.swr)?;
            r.qty(&format!("{p}.snr"), Dim::NONE, &mut props.snr)?;
            r.qty(&format!("{p}.entry_pressure"), Dim::PRESSURE, &mut props.entry_pressure)?;
            r.qty(&format!("{p}.lambda"), Dim::NONE, &mut props.lambda)?;
            r.qty(&format!("{p}.specific_area"), Dim::INVERSE_LENGTH, &mut props.specific_area)?;
            r.qty(&format!("{p}.solid_density"), Dim::DENSITY, &mut props.solid_density)?;
        }

        let f = &mut self.field;
        r.qty("field.log_variance_upper", Dim::NONE, &mut f.log_variance[0])?;
        r.qty("field.log_variance_lower", Dim::NONE, &mut f.log_variance[1])?;
        r.qty("field.correlation_length", Dim::LENGTH, &mut f.correlation_length)?;
        r.boolean("field.condition_mean", &mut f.condition_mean)?;
        let mut path = String::new();
        r.string("field.import", &mut path)?;
        let mut mode = String::from("nearest");
        r.string("field.import_mode", &mut mode)?;
        if !path.is_empty() {
            let mode = match mode.as_str() {
                "nearest" => ImportMode::Nearest,
                "bilinear" => ImportMode::Bilinear,
                other => return Err(Error::config(format!("field.import_mode: unknown mode `{other}`"))),
            };
            self.field_import = Some(FieldImport { path: PathBuf::from(path), mode });
        }

        let fl = &mut self.fluids;
        r.qty("fluids.water_density", Dim::DENSITY, &mut fl.rho_w)?;
        r.qty("fluids.tce_density", Dim::DENSITY, &mut fl.rho_n)?;
        r.qty("fluids.water_viscosity", Dim::VISCOSITY, &mut fl.mu_w)?;
        r.qty("fluids.tce_viscosity", Dim::VISCOSITY, &mut fl.mu_n)?;
        r.qty("fluids.tce_solubility", Dim::DENSITY, &mut fl.solubility)?;
        r.qty("fluids.gravity", Dim::ACCELERATION, &mut fl.g)?;

        let s1 = &mut self.stage1;
        r.qty("stage1.infiltration_flux", Dim::MASS_FLUX, &mut s1.infiltration_flux)?;
        r.qty("stage1.infiltration_duration", Dim::TIME, &mut s1.infiltration_duration)?;
        r.qty("stage1.duration", Dim::TIME, &mut s1.duration)?;
        r.qty("stage1.water_table", Dim::LENGTH, &mut s1.water_table_head)?;
        r.list("stage1.snapshots", Dim::TIME, &mut s1.snapshot_times)?;
        r.qty("stage1.series_interval", Dim::TIME, &mut s1.series_interval)?;
        r.qty("stage1.static_window", Dim::TIME, &mut s1.static_window)?;
        r.qty("stage1.cfl", Dim::NONE, &mut s1.cfl)?;
        r.qty("stage1.max_saturation_change", Dim::NONE, &mut s1.max_saturation_change)?;
        r.count("stage1.max_upwind_iterations", &mut s1.max_upwind_iterations)?;
        r.qty("stage1.pressure_refresh", Dim::NONE, &mut s1.pressure_refresh)?;
        r.qty("stage1.pool_threshold", Dim::NONE, &mut s1.pool_threshold)?;

        let s3 = &mut self.stage3;
        r.qty("flow.left_head", Dim::LENGTH, &mut s3.left_head)?;
        r.qty("flow.right_head", Dim::LENGTH, &mut s3.right_head)?;
        r.qty("transport.diffusion", Dim::DIFFUSIVITY, &mut s3.transport.diffusion)?;
        r.qty("transport.dispersivity", Dim::LENGTH, &mut s3.transport.dispersivity)?;
        r.qty("transport.mass_transfer", Dim::RATE, &mut s3.dissolution.kl)?;

        let s2 = &mut self.stage2;
        r.qty("stage2.duration", Dim::TIME, &mut s2.duration)?;
        r.list("stage2.snapshots", Dim::TIME, &mut s2.snapshot_times)?;
        r.qty("stage2.series_interval", Dim::TIME, &mut s2.series_interval)?;
        r.optional_qty("stage2.flow_refresh", Dim::TIME, &mut s2.natural.flow_refresh)?;

        let n = &mut s3.nzvi;
        r.qty("nzvi.concentration", Dim::DENSITY, &mut n.concentration)?;
        r.qty("nzvi.particle_diameter", Dim::LENGTH, &mut n.particle_diameter)?;
        r.qty("nzvi.attachment_efficiency", Dim::NONE, &mut n.attachment_efficiency)?;
        r.qty("nzvi.particle_density", Dim::DENSITY, &mut n.particle_density)?;
        r.qty("nzvi.injection_velocity", Dim::VELOCITY, &mut n.injection_velocity)?;
        r.qty("nzvi.duration", Dim::TIME, &mut n.duration)?;
        r.qty("nzvi.temperature", Dim::TEMPERATURE, &mut n.temperature)?;
        r.qty("nzvi.hamaker", Dim::ENERGY, &mut n.hamaker)?;
        r.list("nzvi.snapshots", Dim::TIME, &mut s3.snapshot_times)?;
        r.qty("nzvi.roi_threshold", Dim::DENSITY, &mut s3.roi_threshold)?;
        r.qty("nzvi.reversal_offset", Dim::LENGTH, &mut s3.reversal_offset)?;

        let c = &mut s3.clogging;
        r.qty("clogging.initial_specific_area", Dim::INVERSE_LENGTH, &mut c.a0)?;
        r.qty("clogging.particle_specific_area", Dim::INVERSE_LENGTH, &mut c.ap)?;
        r.qty("clogging.solid_density", Dim::DENSITY, &mut c.solid_density)?;
        r.qty("clogging.gamma", Dim::NONE, &mut c.gamma)?;
        r.qty("clogging.deposit_density", Dim::DENSITY, &mut c.deposit_density)?;

        let m = &mut s3.cmc;
        r.qty("cmc.concentration", Dim::DENSITY, &mut m.concentration)?;
        r.qty("cmc.viscosity", Dim::VISCOSITY, &mut m.viscosity)?;
        r.qty("cmc.mole_fraction", Dim::NONE, &mut m.mole_fraction)?;

        let s4 = &mut self.stage4;
        r.qty("stage4.duration", Dim::TIME, &mut s4.duration)?;
        r.list("stage4.snapshots", Dim::TIME, &mut s4.snapshot_times)?;
        r.qty("stage4.series_interval", Dim::TIME, &mut s4.series_interval)?;
        r.optional_qty("stage4.flow_refresh", Dim::TIME, &mut s4.natural.flow_refresh)?;
        let mut enabled = s4.kinetics.is_some();
        r.boolean("reaction.enabled", &mut enabled)?;
        let mut k = s4.kinetics.unwrap_or_default();
        r.qty("reaction.k_sa", Dim::VELOCITY, &mut k.k_sa)?;
        r.qty("reaction.alpha_s", Dim::AREA_PER_MASS, &mut k.alpha_s)?;
        r.qty("reaction.stoichiometry", Dim::NONE, &mut k.stoichiometry)?;
        s4.kinetics = enabled.then_some(k);
        Ok(())
    }
}

struct Entry {
    value: String,
    line: usize,
}

/// Flattened key/value view of a config file that records which keys were
/// consumed.
struct Reader {
    entries: BTreeMap<String, Entry>,
    used: BTreeSet<String>,
}

fn normalise_key(key: &str) -> String {
    key.trim().replace('[', ".").replace(']', "")
}

impl Reader {
    fn new(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::config(format!("line {}: malformed section header `{line}`", n + 1)))?;
                section = normalise_key(name);
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}: expected `key = value`, got `{line}`", n + 1)))?;
            let k = normalise_key(k);
            if k.is_empty() {
                return Err(Error::config(format!("line {}: empty key", n + 1)));
            }
            let key = if section.is_empty() { k } else { format!("{section}.{k}") };
            let entry = Entry { value: v.trim().to_string(), line: n + 1 };
            if let Some(prev) = entries.insert(key.clone(), entry) {
                return Err(Error::config(format!("line {}: `{key}` already set on line {}", n + 1, prev.line)));
            }
        }
        Ok(Reader { entries, used: BTreeSet::new() })
    }

    fn take(&mut self, key: &str) -> Option<&Entry> {
        let e = self.entries.get(key)?;
        self.used.insert(key.to_string());
        Some(e)
    }

    fn err(key: &str, e: &Entry, msg: impl std::fmt::Display) -> Error {
        Error::config(format!("line {} ({key}): {msg}", e.line))
    }

    fn qty(&mut self, key: &str, dim: Dim, out: &mut f64) -> Result<()> {
        if let Some(e) = self.take(key) {
            *out = parse_quantity(&e.value, dim).map_err(|m| Self::err(key, e, m))?;
        }
        Ok(())
    }

    fn required(&mut self, key: &str, dim: Dim, out: &mut f64) -> Result<()> {
        if !self.entries.contains_key(key) {
            return Err(Error::config(format!("missing required key `{key}`")));
        }
        self.qty(key, dim, out)
    }

    /// `none` clears the value.
    fn optional_qty(&mut self, key: &str, dim: Dim, out: &mut Option<f64>) -> Result<()> {
        if let Some(e) = self.take(key) {
            *out = if e.value == "none" {
                None
            } else {
                Some(parse_quantity(&e.value, dim).map_err(|m| Self::err(key, e, m))?)
            };
        }
        Ok(())
    }

    fn list(&mut self, key: &str, dim: Dim, out: &mut Vec<f64>) -> Result<()> {
        if let Some(e) = self.take(key) {
            *out = e
                .value
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| parse_quantity(s, dim).map_err(|m| Self::err(key, e, m)))
                .collect::<Result<_>>()?;
        }
        Ok(())
    }

    fn integer(&mut self, key: &str, out: &mut u64) -> Result<()> {
        if let Some(e) = self.take(key) {
            *out = e.value.parse().map_err(|_| Self::err(key, e, "expected a non-negative integer"))?;
        }
        Ok(())
    }

    fn count(&mut self, key: &str, out: &mut usize) -> Result<()> {
        if let Some(e) = self.take(key) {
            *out = e.value.parse().map_err(|_| Self::err(key, e, "expected a non-negative integer"))?;
        }
        Ok(())
    }

    fn optional_count(&mut self, key: &str, out: &mut Option<usize>) -> Result<()> {
        let mut n = 0;
        if self.entries.contains_key(key) {
            self.count(key, &mut n)?;
            *out = Some(n);
        }
        Ok(())
    }

    fn boolean(&mut self, key: &str, out: &mut bool) -> Result<()> {
        if let Some(e) = self.take(key) {
            *out = match e.value.as_str() {
                "true" | "on" | "yes" => true,
                "false" | "off" | "no" => false,
                _ => return Err(Self::err(key, e, "expected true or false")),
            };
        }
        Ok(())
    }

    fn string(&mut self, key: &str, out: &mut String) -> Result<()> {
        if let Some(e) = self.take(key) {
            *out = e.value.clone();
        }
        Ok(())
    }

    /// Sorted indices `i` for which some key `prefix.i.*` exists.
    fn indexed(&self, prefix: &str) -> Result<Vec<usize>> {
        let mut out = BTreeSet::new();
        let head = format!("{prefix}.");
        for (key, e) in &self.entries {
            if let Some(rest) = key.strip_prefix(&head) {
                let idx = rest.split('.').next().unwrap_or("");
                if idx == "count" {
                    continue;
                }
                let i: usize = idx
                    .parse()
                    .map_err(|_| Self::err(key, e, format!("expected `{prefix}.<index>.<key>`")))?;
                out.insert(i);
            }
        }
        Ok(out.into_iter().collect())
    }

    fn finish(self) -> Result<()> {
        let unknown: Vec<String> = self
            .entries
            .iter()
            .filter(|(k, _)| !self.used.contains(*k))
            .map(|(k, e)| format!("`{k}` (line {})", e.line))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(Error::config(format!("unknown keys: {}", unknown.join(", "))))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{SECONDS_PER_DAY, SECONDS_PER_HOUR};

    /// Every number in the two debug renderings agrees to 1e-12 relative.
    pub(crate) fn assert_configs_close(a: &RunConfig, b: &RunConfig) {
        let (sa, sb) = (format!("{a:?}"), format!("{b:?}"));
        let split = |s: &str| -> Vec<String> {
            s.split(|c: char| !(c.is_ascii_alphanumeric() || c == '.' || c == '-' || c == '_'))
                .filter(|t| !t.is_empty())
                .map(str::to_string)
                .collect()
        };
        let (ta, tb) = (split(&sa), split(&sb));
        assert_eq!(ta.len(), tb.len(), "\n{sa}\n{sb}");
        for (x, y) in ta.iter().zip(&tb) {
            match (x.parse::<f64>(), y.parse::<f64>()) {
                (Ok(u), Ok(v)) => assert!((u - v).abs() <= 1e-12 * u.abs().max(v.abs()), "{x} vs {y}"),
                _ => assert_eq!(x, y),
            }
        }
    }

    #[test]
    fn shipped_default_file_matches_defaults() {
        let text = include_str!("../../config/default.cfg");
        let cfg = RunConfig::parse(text).unwrap();
        assert_configs_close(&cfg, &RunConfig::default());
    }

    #[test]
    fn empty_file_is_default() {
        assert_eq!(RunConfig::parse("# nothing\n").unwrap(), RunConfig::default());
    }

    #[test]
    fn units_are_converted() {
        let cfg = RunConfig::parse("[nzvi]\ninjection_velocity = 88 m/day\nduration = 4 h\n").unwrap();
        assert!((cfg.stage3.nzvi.injection_velocity - 88.0 / SECONDS_PER_DAY).abs() < 1e-18);
        assert_eq!(cfg.stage3.nzvi.duration, 4.0 * SECONDS_PER_HOUR);
        let inj = cfg.geometry.injection_well().unwrap();
        assert_eq!(inj.injection_velocity, cfg.stage3.nzvi.injection_velocity);
    }

    #[test]
    fn unitless_physical_value_is_rejected() {
        let err = RunConfig::parse("[nzvi]\ninjection_velocity = 88\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("no unit"), "{err}");
    }

    #[test]
    fn unknown_and_duplicate_keys_are_rejected() {
        assert!(RunConfig::parse("[domain]\nwidht = 3 m\n").is_err());
        assert!(RunConfig::parse("[grid]\ndx = 0.1 m\ndx = 0.2 m\n").is_err());
        assert!(RunConfig::parse("[grid]\ndx = 0 m\n").is_err());
    }

    #[test]
    fn lenses_replace_defaults() {
        let cfg = RunConfig::parse("[domain]\nlens_count = 0\n").unwrap();
        assert!(cfg.geometry.lenses.is_empty());
        let cfg = RunConfig::parse("[lens[0]]\nx0 = 1 m\ny0 = 1 m\nx1 = 2 m\ny1 = 150 cm\n").unwrap();
        assert_eq!(cfg.geometry.lenses, vec![Rect { x0: 1.0, y0: 1.0, x1: 2.0, y1: 1.5 }]);
        assert!(RunConfig::parse("[lens.0]\nx0 = 1 m\n").is_err());
    }

    #[test]
    fn reaction_can_be_disabled_and_seed_propagates() {
        let cfg = RunConfig::parse("[run]\nseed = 7\n[reaction]\nenabled = false\n").unwrap();
        assert!(cfg.stage4.kinetics.is_none());
        assert_eq!(cfg.field.seed, 7);
        assert_ne!(cfg.hash(), RunConfig::default().hash());
        assert_eq!(RunConfig::default().hash(), RunConfig::default().hash());
    }
}
