//! Binary ensemble cache with a human-readable sidecar.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic        8 bytes  "MFXENS\0\0"
//! version      u32
//! config hash  32 bytes
//! realizations u64
//! states       u32, then that many i32
//! cn2, l0, L0  3 × f64
//! base seed    u64
//! payload      f64 (re, im) pairs, row-major [realization][k][i]
//! ```
//!
//! The sidecar `<file>.meta` repeats the header as `key=value` lines.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::config::{hash_hex, SimulationConfig};
use crate::ensemble::{ChannelEnsemble, ChannelSimulator, CouplingMatrix};
use crate::error::{PersistenceError, Result};
use crate::modes::ModeState;
use crate::turbulence::TurbulenceParams;

pub const MAGIC: &[u8; 8] = b"MFXENS\0\0";
pub const FORMAT_VERSION: u32 = 1;

/// Environment variable naming the default cache directory.
pub const CACHE_DIR_ENV: &str = "MODEFLUX_CACHE_DIR";

/// Realizations simulated between progress messages in [`ensure_ensemble`].
const PROGRESS_CHUNK: u64 = 100;

/// Default cache file name for a configuration.
pub fn cache_file_name(config: &SimulationConfig) -> String {
    format!("ensemble-{}.mfx", &hash_hex(&config.config_hash())[..16])
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

fn io_err(path: &Path, source: std::io::Error) -> PersistenceError {
    PersistenceError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn header_bytes(e: &ChannelEnsemble) -> Vec<u8> {
    let mut h = Vec::new();
    h.extend_from_slice(MAGIC);
    h.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    h.extend_from_slice(e.config_hash());
    h.extend_from_slice(&(e.len() as u64).to_le_bytes());
    h.extend_from_slice(&(e.states().len() as u32).to_le_bytes());
    for s in e.states() {
        h.extend_from_slice(&s.ell().to_le_bytes());
    }
    let p = e.params();
    for v in [p.cn2(), p.inner_scale(), p.outer_scale()] {
        h.extend_from_slice(&v.to_le_bytes());
    }
    h.extend_from_slice(&e.base_seed().to_le_bytes());
    h
}

fn sidecar_text(e: &ChannelEnsemble) -> String {
    let states: Vec<String> = e.states().iter().map(|s| s.ell().to_string()).collect();
    let p = e.params();
    format!(
        "format_version={FORMAT_VERSION}\nconfig_hash={}\nrealizations={}\nstates={}\ncn2={:?}\ninner_scale_m={:?}\nouter_scale_m={:?}\nbase_seed={}\n",
        hash_hex(e.config_hash()),
        e.len(),
        states.join(","),
        p.cn2(),
        p.inner_scale(),
        p.outer_scale(),
        e.base_seed()
    )
}

/// Writes the cache and its sidecar. The binary is written to a temporary
/// name first and renamed, so a crash never leaves a half-written cache.
pub fn save_ensemble(ensemble: &ChannelEnsemble, path: &Path) -> Result<()> {
    let mut bytes = header_bytes(ensemble);
    bytes.reserve(ensemble.len() * ensemble.states().len().pow(2) * 16);
    for m in ensemble.realizations() {
        for a in m.alpha() {
            bytes.extend_from_slice(&a.re.to_le_bytes());
            bytes.extend_from_slice(&a.im.to_le_bytes());
        }
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
        f.write_all(&bytes).map_err(|e| io_err(&tmp, e))?;
        f.sync_all().map_err(|e| io_err(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))?;
    let meta = sidecar_path(path);
    fs::write(&meta, sidecar_text(ensemble)).map_err(|e| io_err(&meta, e))?;
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, expected_total: usize) -> std::result::Result<&'a [u8], PersistenceError> {
        if self.pos + n > self.bytes.len() {
            return Err(PersistenceError::Truncated {
                path: self.path.to_path_buf(),
                found: self.bytes.len() as u64,
                expected: expected_total.max(self.pos + n) as u64,
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> std::result::Result<[u8; N], PersistenceError> {
        Ok(self.take(N, 0)?.try_into().expect("length checked"))
    }
}

fn parse_sidecar_hash(path: &Path) -> std::result::Result<Option<String>, PersistenceError> {
    let meta = sidecar_path(path);
    let text = match fs::read_to_string(&meta) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(io_err(&meta, e)),
    };
    Ok(text
        .lines()
        .find_map(|l| l.strip_prefix("config_hash="))
        .map(|s| s.trim().to_string()))
}

/// Reads a cache. The header hash must agree with the sidecar (when present)
/// and with `expected_hash` (when given).
pub fn load_ensemble_checked(path: &Path, expected_hash: Option<&[u8; 32]>) -> Result<ChannelEnsemble> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    let malformed = |reason: String| PersistenceError::Malformed {
        path: path.to_path_buf(),
        reason,
    };
    let mut r = Reader {
        bytes: &bytes,
        pos: 0,
        path,
    };
    if r.take(8, 0).ok() != Some(MAGIC.as_slice()) {
        return Err(PersistenceError::BadMagic(path.to_path_buf()).into());
    }
    let version = u32::from_le_bytes(r.array()?);
    if version != FORMAT_VERSION {
        return Err(PersistenceError::Version {
            path: path.to_path_buf(),
            found: version,
            expected: FORMAT_VERSION,
        }
        .into());
    }
    let hash: [u8; 32] = r.array()?;
    let count = u64::from_le_bytes(r.array()?) as usize;
    let n_states = u32::from_le_bytes(r.array()?) as usize;
    if n_states == 0 || count == 0 {
        return Err(malformed(format!("{count} realizations of {n_states} states")).into());
    }
    let states: Vec<ModeState> = (0..n_states)
        .map(|_| r.array().map(|b| ModeState(i32::from_le_bytes(b))))
        .collect::<std::result::Result<_, _>>()?;
    let cn2 = f64::from_le_bytes(r.array()?);
    let l0 = f64::from_le_bytes(r.array()?);
    let outer = f64::from_le_bytes(r.array()?);
    let base_seed = u64::from_le_bytes(r.array()?);

    let found = hash_hex(&hash);
    if let Some(side) = parse_sidecar_hash(path)? {
        if side != found {
            return Err(PersistenceError::HashMismatch {
                path: path.to_path_buf(),
                found,
                expected: side,
            }
            .into());
        }
    }
    if let Some(exp) = expected_hash {
        if exp != &hash {
            return Err(PersistenceError::HashMismatch {
                path: path.to_path_buf(),
                found,
                expected: hash_hex(exp),
            }
            .into());
        }
    }

    let per = n_states * n_states;
    let total = r.pos + count * per * 16;
    if bytes.len() < total {
        return Err(PersistenceError::Truncated {
            path: path.to_path_buf(),
            found: bytes.len() as u64,
            expected: total as u64,
        }
        .into());
    }
    if bytes.len() > total {
        return Err(malformed(format!("{} trailing bytes", bytes.len() - total)).into());
    }
    let params = TurbulenceParams::new(cn2, l0, outer).map_err(|e| malformed(e.to_string()))?;
    let mut realizations = Vec::with_capacity(count);
    for _ in 0..count {
        let mut alpha = Vec::with_capacity(per);
        for _ in 0..per {
            let re = f64::from_le_bytes(r.array()?);
            let im = f64::from_le_bytes(r.array()?);
            alpha.push(Complex64::new(re, im));
        }
        realizations
            .push(CouplingMatrix::new(states.clone(), alpha).map_err(|e| malformed(e.to_string()))?);
    }
    ChannelEnsemble::new(hash, realizations, params, base_seed)
}

pub fn load_ensemble(path: &Path) -> Result<ChannelEnsemble> {
    load_ensemble_checked(path, None)
}

/// How [`ensure_ensemble`] obtained its ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Loaded,
    Generated,
}

/// Loads the cache at `path` if it matches `config`, otherwise simulates the
/// ensemble and writes it there. `force` always regenerates.
pub fn ensure_ensemble(config: &SimulationConfig, path: &Path, force: bool) -> Result<(ChannelEnsemble, CacheStatus)> {
    let hash = config.config_hash();
    if !force && path.exists() {
        return Ok((load_ensemble_checked(path, Some(&hash))?, CacheStatus::Loaded));
    }
    let sim = ChannelSimulator::<f64>::from_config(config)?;
    let total = config.ensemble.realizations as u64;
    let mut realizations = Vec::with_capacity(total as usize);
    let mut start = 0;
    while start < total {
        let end = (start + PROGRESS_CHUNK).min(total);
        realizations.extend(sim.run(start..end)?);
        log::info!("{end}/{total} realizations");
        start = end;
    }
    let ensemble = ChannelEnsemble::new(hash, realizations, config.turbulence_params()?, config.ensemble.base_seed)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    save_ensemble(&ensemble, path)?;
    Ok((ensemble, CacheStatus::Generated))
}
