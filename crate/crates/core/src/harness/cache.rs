use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::eigen::eigenvalues;
use crate::operator::{read_values, write_values, Role};
use crate::quantization::{damped_propagator, PropagatorSpec};
use crate::spectral::SpectrumResult;
use crate::{DenseOperator, Result};

/// Baked into every cache key; bump when numerics change.
pub const CODE_VERSION: &str = concat!("qmap-core/", env!("CARGO_PKG_VERSION"), "/eig1");

pub fn cache_key(spec: &PropagatorSpec) -> String {
    cache_key_with_version(spec, CODE_VERSION)
}

pub fn cache_key_with_version(spec: &PropagatorSpec, version: &str) -> String {
    let text = format!(
        "m={};alpha={};damping={};N={};version={}",
        spec.map.m(),
        spec.map.alpha(),
        spec.damping.label(),
        spec.dim,
        version
    );
    hex::encode(Sha256::digest(text.as_bytes()))
}

static STAGING: AtomicU64 = AtomicU64::new(0);

/// Writes through a private staging file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(d) = dir {
        fs::create_dir_all(d)?;
    }
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(
        ".{name}.{}-{}.staging",
        std::process::id(),
        STAGING.fetch_add(1, Ordering::Relaxed)
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct SpectrumMeta {
    residual: f64,
    version: String,
}

/// Operator and spectrum files keyed by [`cache_key`].
#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

/// Where a spectrum came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Cached,
    Computed,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn operator_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.op"))
    }

    pub fn spectrum_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.eig"))
    }

    fn meta_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.meta.json"))
    }

    /// Loads `M_h` or builds and stores it. Unreadable files are replaced.
    pub fn propagator(&self, spec: &PropagatorSpec) -> Result<(DenseOperator, Origin)> {
        let key = cache_key(spec);
        let path = self.operator_path(&key);
        if path.exists() {
            match fs::read(&path).map_err(Into::into).and_then(|b| DenseOperator::from_bytes(&b)) {
                Ok((op, Role::Propagator)) if op.dim() == spec.dim => return Ok((op, Origin::Cached)),
                Ok(_) => log::warn!("cache file {} has the wrong shape; recomputing", path.display()),
                Err(e) => log::warn!("cache file {} unreadable ({e}); recomputing", path.display()),
            }
        }
        let op = damped_propagator(spec)?;
        write_atomic(&path, &op.to_bytes(Role::Propagator))?;
        Ok((op, Origin::Computed))
    }

    fn load_spectrum(&self, key: &str, dim: usize) -> Option<SpectrumResult> {
        let path = self.spectrum_path(key);
        if !path.exists() {
            return None;
        }
        let values = fs::read(&path)
            .map_err(Into::into)
            .and_then(|b| read_values(&mut &b[..]));
        let meta: Option<SpectrumMeta> = fs::read(self.meta_path(key))
            .ok()
            .and_then(|b| serde_json::from_slice(&b).ok());
        match (values, meta) {
            (Ok(v), Some(meta)) if v.len() == dim && meta.version == CODE_VERSION => {
                Some(SpectrumResult::from_eigenvalues(v, key.to_string(), meta.residual))
            }
            (Err(e), _) => {
                log::warn!("cache file {} unreadable ({e}); recomputing", path.display());
                None
            }
            _ => {
                log::warn!("cache entry {key} incomplete; recomputing");
                None
            }
        }
    }

    fn store_spectrum(&self, key: &str, s: &SpectrumResult) -> Result<()> {
        let mut buf = Vec::new();
        write_values(&mut buf, &s.eigenvalues)?;
        write_atomic(&self.spectrum_path(key), &buf)?;
        let meta = SpectrumMeta {
            residual: s.residual,
            version: CODE_VERSION.to_string(),
        };
        write_atomic(&self.meta_path(key), &serde_json::to_vec(&meta).expect("meta serializes"))
    }

    /// Cached spectrum, or a fresh one (stored for next time).
    pub fn spectrum(&self, spec: &PropagatorSpec) -> Result<(SpectrumResult, Origin)> {
        let key = cache_key(spec);
        if let Some(s) = self.load_spectrum(&key, spec.dim) {
            return Ok((s, Origin::Cached));
        }
        let (m, _) = self.propagator(spec)?;
        let s = spectrum_of(&m, key.clone())?;
        self.store_spectrum(&key, &s)?;
        Ok((s, Origin::Computed))
    }
}

pub(crate) fn spectrum_of(m: &DenseOperator, key: String) -> Result<SpectrumResult> {
    let report = eigenvalues(m)?;
    Ok(SpectrumResult::from_eigenvalues(report.values, key, report.max_residual))
}

/// Largest entrywise difference between two sorted spectra (∞ on length
/// mismatch).
pub fn spectrum_difference(a: &SpectrumResult, b: &SpectrumResult) -> f64 {
    if a.eigenvalues.len() != b.eigenvalues.len() {
        return f64::INFINITY;
    }
    a.eigenvalues
        .iter()
        .zip(&b.eigenvalues)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
