//! Content-addressed spectrum cache.
//!
//! Eigenvalues depend only on (Λ, z₁, solver settings, level count), so a
//! solved spectrum is stored under a hash of exactly those. Records are plain
//! text with every float written as its IEEE-754 bit pattern in hex, which
//! round-trips bit-exactly:
//!
//! ```text
//! dimple-spectrum 1
//! lambda 4040000000000000
//! z1 3ff0000000000000
//! settings 5c1f0e2d9a7b3c41
//! levels 3
//! c00ffb4b5a1d2a1c E
//! 3fef6ab9c1e8d3d2 E
//! 4000000000000000 U
//! ```

use super::{solve_spectrum, DimpleSpec, SolverSettings, Spectrum, SpectrumError, Zone};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, RwLock};
use thiserror::Error;

const MAGIC: &str = "dimple-spectrum 1";
/// Refuse absurd level counts before allocating.
const MAX_RECORD_LEVELS: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CacheFormatError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("truncated record: expected {expected} levels, found {found}")]
    Truncated { expected: usize, found: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CacheRecord {
    pub dimple: DimpleSpec,
    pub settings_digest: String,
    pub xis: Vec<f64>,
    pub zones: Vec<Zone>,
}

pub fn encode_record(spec: &Spectrum) -> String {
    let mut out = String::with_capacity(32 * spec.xis.len() + 128);
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("lambda {:016x}\n", spec.dimple.lambda.to_bits()));
    out.push_str(&format!("z1 {:016x}\n", spec.dimple.z1.to_bits()));
    out.push_str(&format!("settings {}\n", spec.settings.digest()));
    out.push_str(&format!("levels {}\n", spec.xis.len()));
    for (xi, zone) in spec.xis.iter().zip(&spec.zones) {
        out.push_str(&format!("{:016x} {}\n", xi.to_bits(), zone.tag()));
    }
    out
}

fn malformed(line: usize, msg: impl Into<String>) -> CacheFormatError {
    CacheFormatError::Malformed { line, msg: msg.into() }
}

fn parse_bits(s: &str, line: usize) -> Result<f64, CacheFormatError> {
    if s.len() != 16 {
        return Err(malformed(line, format!("expected 16 hex digits, got {s:?}")));
    }
    let bits = u64::from_str_radix(s, 16).map_err(|e| malformed(line, e.to_string()))?;
    Ok(f64::from_bits(bits))
}

fn field<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    key: &str,
) -> Result<(usize, &'a str), CacheFormatError> {
    let (no, l) = lines.next().ok_or_else(|| malformed(0, format!("missing {key}")))?;
    let rest = l
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| malformed(no, format!("expected '{key} ...'")))?;
    Ok((no, rest))
}

pub fn decode_record(text: &str) -> Result<CacheRecord, CacheFormatError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l == MAGIC => {}
        _ => return Err(malformed(1, "bad header")),
    }
    let (no, v) = field(&mut lines, "lambda")?;
    let lambda = parse_bits(v, no)?;
    let (no, v) = field(&mut lines, "z1")?;
    let z1 = parse_bits(v, no)?;
    let dimple = DimpleSpec::new(lambda, z1).map_err(|e| malformed(no, e.to_string()))?;
    let (no, digest) = field(&mut lines, "settings")?;
    if digest.is_empty() || !digest.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(malformed(no, "settings digest must be hex"));
    }
    let (no, v) = field(&mut lines, "levels")?;
    let levels: usize = v.parse().map_err(|_| malformed(no, format!("bad level count {v:?}")))?;
    if levels == 0 || levels > MAX_RECORD_LEVELS {
        return Err(malformed(no, format!("level count {levels} out of range")));
    }

    let mut xis = Vec::with_capacity(levels.min(1 << 16));
    let mut zones = Vec::with_capacity(levels.min(1 << 16));
    for (no, l) in lines {
        if xis.len() == levels {
            return Err(malformed(no, "trailing data after last level"));
        }
        let (bits, tag) = l.split_once(' ').ok_or_else(|| malformed(no, "expected '<bits> <zone>'"))?;
        let xi = parse_bits(bits, no)?;
        if !xi.is_finite() {
            return Err(malformed(no, "non-finite eigenvalue"));
        }
        let mut chars = tag.chars();
        let zone = match (chars.next().and_then(Zone::from_tag), chars.next()) {
            (Some(z), None) => z,
            _ => return Err(malformed(no, format!("bad zone tag {tag:?}"))),
        };
        if let Some(&prev) = xis.last() {
            if xi <= prev {
                return Err(malformed(no, "eigenvalues not strictly increasing"));
            }
        }
        xis.push(xi);
        zones.push(zone);
    }
    if xis.len() != levels {
        return Err(CacheFormatError::Truncated { expected: levels, found: xis.len() });
    }
    Ok(CacheRecord { dimple, settings_digest: digest.to_string(), xis, zones })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct CacheKey {
    lambda: u64,
    z1: u64,
    digest: String,
    levels: usize,
}

impl CacheKey {
    fn file_name(&self) -> String {
        let text = format!("{:016x}|{:016x}|{}|{}", self.lambda, self.z1, self.digest, self.levels);
        format!("{}.spec", hex::encode(&Sha256::digest(text.as_bytes())[..16]))
    }
}

/// Shared spectrum store: many concurrent readers, insertion under a write
/// lock. Two threads may solve the same key at once; the later insert wins
/// and both results are identical.
#[derive(Debug, Default)]
pub struct SpectrumCache {
    memory: RwLock<HashMap<CacheKey, Arc<Spectrum>>>,
    dir: Option<PathBuf>,
    fresh_solves: AtomicUsize,
    disk_hits: AtomicUsize,
}

impl SpectrumCache {
    /// In-memory only.
    pub fn new() -> Self {
        SpectrumCache::default()
    }

    /// Backed by record files in `dir` (created on first write).
    pub fn with_dir(dir: impl Into<PathBuf>) -> Self {
        SpectrumCache { dir: Some(dir.into()), ..Default::default() }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    /// Exact (zone 1) root solves performed by this cache so far.
    pub fn fresh_solves(&self) -> usize {
        self.fresh_solves.load(Ordering::Relaxed)
    }

    pub fn disk_hits(&self) -> usize {
        self.disk_hits.load(Ordering::Relaxed)
    }

    pub fn get_or_solve(
        &self,
        dimple: &DimpleSpec,
        settings: &SolverSettings,
        levels: usize,
    ) -> Result<Arc<Spectrum>, SpectrumError> {
        let key =
            CacheKey { lambda: dimple.lambda.to_bits(), z1: dimple.z1.to_bits(), digest: settings.digest(), levels };
        if let Some(hit) = self.memory.read().expect("cache lock").get(&key) {
            return Ok(Arc::clone(hit));
        }
        if let Some(spec) = self.load(&key, dimple, settings) {
            self.disk_hits.fetch_add(1, Ordering::Relaxed);
            return Ok(self.insert(key, spec));
        }
        let spec = solve_spectrum(dimple, settings, levels)?;
        if dimple.lambda != 0.0 {
            self.fresh_solves.fetch_add(spec.exact_root_count(), Ordering::Relaxed);
        }
        self.store(&key, &spec)?;
        Ok(self.insert(key, spec))
    }

    fn insert(&self, key: CacheKey, spec: Spectrum) -> Arc<Spectrum> {
        let spec = Arc::new(spec);
        self.memory.write().expect("cache lock").insert(key, Arc::clone(&spec));
        spec
    }

    fn load(&self, key: &CacheKey, dimple: &DimpleSpec, settings: &SolverSettings) -> Option<Spectrum> {
        let path = self.dir.as_ref()?.join(key.file_name());
        let text = fs::read_to_string(path).ok()?;
        let rec = decode_record(&text).ok()?;
        let matches = rec.dimple.lambda.to_bits() == key.lambda
            && rec.dimple.z1.to_bits() == key.z1
            && rec.settings_digest == key.digest
            && rec.xis.len() == key.levels;
        // a stale or colliding file is just a miss
        matches.then(|| Spectrum { xis: rec.xis, zones: rec.zones, dimple: *dimple, settings: *settings })
    }

    fn store(&self, key: &CacheKey, spec: &Spectrum) -> Result<(), SpectrumError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        fs::create_dir_all(dir).map_err(|e| SpectrumError::Io(format!("{}: {e}", dir.display())))?;
        let path = dir.join(key.file_name());
        let tmp = dir.join(format!("{}.tmp{}", key.file_name(), std::process::id()));
        fs::write(&tmp, encode_record(spec)).map_err(|e| SpectrumError::Io(format!("{}: {e}", tmp.display())))?;
        fs::rename(&tmp, &path).map_err(|e| SpectrumError::Io(format!("{}: {e}", path.display())))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SolverSettings {
        SolverSettings { exact_levels: 6, perturbative_levels: 12, ..Default::default() }
    }

    #[test]
    fn record_round_trips_bit_exactly() {
        let spec = solve_spectrum(&DimpleSpec::new(3.2, -1.1).unwrap(), &small(), 16).unwrap();
        let rec = decode_record(&encode_record(&spec)).unwrap();
        assert_eq!(rec.xis.len(), 16);
        for (a, b) in rec.xis.iter().zip(&spec.xis) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(rec.zones, spec.zones);
        assert_eq!(rec.settings_digest, small().digest());
    }

    #[test]
    fn rejects_damaged_records() {
        let spec = solve_spectrum(&DimpleSpec::new(1.0, 0.5).unwrap(), &small(), 4).unwrap();
        let good = encode_record(&spec);
        assert!(decode_record(&good.replace("dimple-spectrum 1", "nope")).is_err());
        let cut: String = good.lines().take(7).map(|l| format!("{l}\n")).collect();
        assert!(matches!(decode_record(&cut), Err(CacheFormatError::Truncated { .. })));
        assert!(decode_record(&good.replace(" E\n", " X\n")).is_err());
        assert!(decode_record(&format!("{good}0000000000000000 E\n")).is_err());
    }

    #[test]
    fn second_lookup_is_free() {
        let dir = tempfile::tempdir().unwrap();
        let d = DimpleSpec::new(2.0, 0.3).unwrap();
        let first = SpectrumCache::with_dir(dir.path());
        let a = first.get_or_solve(&d, &small(), 10).unwrap();
        assert_eq!(first.fresh_solves(), 6);
        first.get_or_solve(&d, &small(), 10).unwrap();
        assert_eq!(first.fresh_solves(), 6);

        let second = SpectrumCache::with_dir(dir.path());
        let b = second.get_or_solve(&d, &small(), 10).unwrap();
        assert_eq!(second.fresh_solves(), 0);
        assert_eq!(second.disk_hits(), 1);
        assert_eq!(a.xis, b.xis);
    }
}
