//! Stage checkpoints: a plain-text manifest terminated by `end_manifest`,
//! followed by each field as little-endian `f64` in row-major cell order.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::state::{SimState, StageId, FIELD_NAMES};

pub const FORMAT_TAG: &str = "aquifer-checkpoint";
pub const FORMAT_VERSION: u32 = 1;
const END: &str = "end_manifest";

#[derive(Clone, Debug, PartialEq)]
pub struct Manifest {
    pub version: u32,
    pub stage: StageId,
    pub clock: f64,
    pub nx: usize,
    pub ny: usize,
    pub seed: u64,
    pub config_hash: String,
    /// Field names and lengths, in payload order.
    pub fields: Vec<(String, usize)>,
    pub ledger: BTreeMap<String, f64>,
}

/// Conventional checkpoint file name for a stage.
pub fn checkpoint_path(dir: &Path, stage: StageId) -> PathBuf {
    dir.join(format!("stage{stage}.ckpt"))
}

fn render_manifest(m: &Manifest) -> String {
    let mut s = String::new();
    s.push_str(FORMAT_TAG);
    s.push('\n');
    s.push_str(&format!("version {}\n", m.version));
    s.push_str(&format!("stage {}\n", m.stage));
    s.push_str(&format!("clock {:?}\n", m.clock));
    s.push_str(&format!("nx {}\nny {}\n", m.nx, m.ny));
    s.push_str(&format!("seed {}\n", m.seed));
    s.push_str(&format!("config_hash {}\n", m.config_hash));
    for (k, v) in &m.ledger {
        s.push_str(&format!("ledger {k} {v:?}\n"));
    }
    for (name, len) in &m.fields {
        s.push_str(&format!("field {name} {len}\n"));
    }
    s.push_str(END);
    s.push('\n');
    s
}

pub fn write_checkpoint(path: &Path, state: &SimState, dims: (usize, usize), seed: u64, config_hash: &str) -> Result<()> {
    let n = dims.0 * dims.1;
    let fields = state.fields();
    if let Some((name, f)) = fields.iter().find(|(_, f)| f.len() != n) {
        return Err(Error::Checkpoint(format!("field {name} has {} values, grid has {n} cells", f.len())));
    }
    let manifest = Manifest {
        version: FORMAT_VERSION,
        stage: state.stage,
        clock: state.clock,
        nx: dims.0,
        ny: dims.1,
        seed,
        config_hash: config_hash.to_string(),
        fields: fields.iter().map(|(name, f)| (name.to_string(), f.len())).collect(),
        ledger: state.ledger.clone(),
    };
    let mut bytes = render_manifest(&manifest).into_bytes();
    bytes.reserve(fields.len() * n * 8);
    for (_, f) in fields {
        for v in f {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("ckpt.partial");
    {
        let mut file = File::create(&tmp)?;
        file.write_all(&bytes)?;
        file.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

fn parse_manifest(lines: &[String]) -> Result<Manifest> {
    let mut it = lines.iter();
    if it.next().map(String::as_str) != Some(FORMAT_TAG) {
        return Err(bad("not a checkpoint file"));
    }
    let mut m = Manifest {
        version: 0,
        stage: 0,
        clock: f64::NAN,
        nx: 0,
        ny: 0,
        seed: 0,
        config_hash: String::new(),
        fields: Vec::new(),
        ledger: BTreeMap::new(),
    };
    for line in it {
        let mut parts = line.splitn(3, ' ');
        let key = parts.next().unwrap_or("");
        let a = parts.next().ok_or_else(|| bad(format!("malformed manifest line `{line}`")))?;
        let b = parts.next();
        let num = |s: &str| s.parse::<u64>().map_err(|_| bad(format!("malformed manifest line `{line}`")));
        let float = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("malformed manifest line `{line}`")));
        match (key, b) {
            ("version", None) => {
                m.version = num(a)? as u32;
                if m.version > FORMAT_VERSION {
                    return Err(bad(format!(
                        "checkpoint version {} is newer than the supported version {FORMAT_VERSION}",
                        m.version
                    )));
                }
            }
            ("stage", None) => m.stage = num(a)? as StageId,
            ("clock", None) => m.clock = float(a)?,
            ("nx", None) => m.nx = num(a)? as usize,
            ("ny", None) => m.ny = num(a)? as usize,
            ("seed", None) => m.seed = num(a)?,
            ("config_hash", None) => m.config_hash = a.to_string(),
            ("ledger", Some(v)) => {
                m.ledger.insert(a.to_string(), float(v)?);
            }
            ("field", Some(len)) => m.fields.push((a.to_string(), num(len)? as usize)),
            _ => return Err(bad(format!("unrecognised manifest line `{line}`"))),
        }
    }
    if m.version == 0 || !m.clock.is_finite() {
        return Err(bad("manifest lacks a version or clock"));
    }
    Ok(m)
}

/// Reads manifest lines and returns them with the byte length consumed.
fn read_manifest_lines(reader: &mut impl BufRead) -> Result<(Vec<String>, usize)> {
    let mut lines = Vec::new();
    let mut consumed = 0;
    let mut buf = Vec::new();
    loop {
        buf.clear();
        let n = reader.read_until(b'\n', &mut buf)?;
        if n == 0 {
            return Err(bad("file ends before the manifest terminator"));
        }
        consumed += n;
        let line = std::str::from_utf8(&buf).map_err(|_| bad("manifest is not valid text"))?.trim_end().to_string();
        if line == END {
            return Ok((lines, consumed));
        }
        if lines.is_empty() && line != FORMAT_TAG {
            return Err(bad("not a checkpoint file"));
        }
        lines.push(line);
    }
}

/// Reads only the manifest, without touching the field payload.
pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let mut reader = BufReader::new(open(path)?);
    let (lines, _) = read_manifest_lines(&mut reader)?;
    parse_manifest(&lines)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingCheckpoint(path.to_path_buf())
        } else {
            Error::Io(e)
        }
    })
}

pub fn read_checkpoint(path: &Path) -> Result<(Manifest, SimState)> {
    let mut reader = BufReader::new(open(path)?);
    let (lines, _) = read_manifest_lines(&mut reader)?;
    let manifest = parse_manifest(&lines)?;
    let mut payload = Vec::new();
    reader.read_to_end(&mut payload)?;
    let n = manifest.nx * manifest.ny;
    let expected: usize = manifest.fields.iter().map(|(_, len)| len * 8).sum();
    if payload.len() != expected {
        return Err(bad(format!(
            "payload length mismatch: manifest declares {expected} bytes, file holds {}",
            payload.len()
        )));
    }
    let names: Vec<&str> = manifest.fields.iter().map(|(s, _)| s.as_str()).collect();
    if names != FIELD_NAMES {
        return Err(bad(format!("unexpected field list {names:?}")));
    }
    let mut state = SimState::blank(n, vec![0.0; n], vec![0.0; n]);
    let mut offset = 0;
    for (name, len) in &manifest.fields {
        if *len != n {
            return Err(bad(format!("field {name} has {len} values, grid has {n} cells")));
        }
        let values: Vec<f64> = payload[offset..offset + len * 8]
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("chunk of eight bytes")))
            .collect();
        offset += len * 8;
        *state.field_mut(name).expect("field name checked above") = values;
    }
    state.stage = manifest.stage;
    state.clock = manifest.clock;
    state.ledger = manifest.ledger.clone();
    Ok((manifest, state))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_state() -> SimState {
        let n = 6;
        let mut s = SimState::blank(n, vec![0.4; n], vec![1e-12; n]);
        s.stage = 2;
        s.clock = 1.0 / 3.0 * 86_400.0;
        s.sn = vec![0.0, 0.1, 1e-300, -0.0, 0.7, f64::MIN_POSITIVE];
        s.sync_water_saturation();
        s.c_tce = (0..n).map(|i| (i as f64).sqrt()).collect();
        s.ledger.insert("tce.dissolved".into(), 0.1 + 0.2);
        s
    }

    #[test]
    fn round_trip_is_bitwise_and_resave_is_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.ckpt");
        let s = sample_state();
        write_checkpoint(&path, &s, (3, 2), 42, "abc").unwrap();
        let (m, back) = read_checkpoint(&path).unwrap();
        assert_eq!(m.seed, 42);
        assert_eq!(m.config_hash, "abc");
        for ((_, a), (_, b)) in s.fields().iter().zip(back.fields().iter()) {
            let bits = |v: &Vec<f64>| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(a), bits(b));
        }
        assert_eq!(back.ledger, s.ledger);
        assert_eq!(back.clock.to_bits(), s.clock.to_bits());
        let path2 = dir.path().join("b.ckpt");
        write_checkpoint(&path2, &back, (3, 2), 42, "abc").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn truncated_file_is_length_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.ckpt");
        write_checkpoint(&path, &sample_state(), (3, 2), 1, "h").unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 5]).unwrap();
        let err = read_checkpoint(&path).unwrap_err();
        assert!(err.to_string().contains("length mismatch"), "{err}");
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn manifest_only_inspection() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.ckpt");
        let s = sample_state();
        write_checkpoint(&path, &s, (3, 2), 1, "h").unwrap();
        // corrupt the payload; the manifest is still readable
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 100);
        std::fs::write(&path, &bytes).unwrap();
        let m = read_manifest(&path).unwrap();
        assert_eq!(m.stage, 2);
        assert_eq!(m.clock, s.clock);
        assert_eq!(m.fields.len(), FIELD_NAMES.len());
    }

    #[test]
    fn newer_version_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.ckpt");
        write_checkpoint(&path, &sample_state(), (3, 2), 1, "h").unwrap();
        let text = std::fs::read(&path).unwrap();
        let patched = String::from_utf8_lossy(&text[..40]).replace("version 1", "version 9");
        let mut out = patched.into_bytes();
        out.extend_from_slice(&text[40..]);
        std::fs::write(&path, out).unwrap();
        let err = read_checkpoint(&path).unwrap_err();
        assert!(err.to_string().contains("newer"), "{err}");
    }

    #[test]
    fn missing_file_maps_to_missing_checkpoint() {
        let err = read_checkpoint(Path::new("/nonexistent/stage2.ckpt")).unwrap_err();
        assert!(matches!(err, Error::MissingCheckpoint(_)));
        assert_eq!(err.exit_code(), 3);
    }
}
