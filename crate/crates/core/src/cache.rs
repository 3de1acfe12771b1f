//! On-disk cache of [`Prepared`] artifacts, keyed by [`artifact_key`].
//!
//! Each entry is `<key>.bin`: the 32-byte SHA-256 of the payload followed
//! by the bincode payload.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hrtf::HrtfSet;
use crate::localization::{artifact_key, prepare, LocalizationConfig, Prepared};

pub const CACHE_ENV: &str = "BINAURAL_DOA_CACHE";
const DEFAULT_DIR: &str = ".binaural-doa-cache";

/// `$BINAURAL_DOA_CACHE` if set, otherwise `.binaural-doa-cache` in the
/// working directory.
pub fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_DIR))
}

pub fn entry_path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("{key}.bin"))
}

pub fn store_prepared(dir: &Path, prepared: &Prepared) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let payload = bincode::serialize(prepared)
        .map_err(|e| Error::invalid(format!("cannot serialise artifacts: {e}")))?;
    let mut bytes = Sha256::digest(&payload).to_vec();
    bytes.extend_from_slice(&payload);
    let path = entry_path(dir, &prepared.key);
    // Write then rename so a concurrent reader never sees half a file.
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, &bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// `Ok(None)` if there is no entry for `key`.
pub fn load_prepared(dir: &Path, key: &str) -> Result<Option<Prepared>> {
    let path = entry_path(dir, key);
    let bytes = match std::fs::read(&path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(Error::io(&path, e)),
    };
    if bytes.len() < 32 || Sha256::digest(&bytes[32..]).as_slice() != &bytes[..32] {
        return Err(Error::Checksum { path });
    }
    let prepared: Prepared =
        bincode::deserialize(&bytes[32..]).map_err(|e| Error::malformed(&path, e.to_string()))?;
    if prepared.key != key {
        return Err(Error::malformed(
            &path,
            "entry was stored under another key",
        ));
    }
    Ok(Some(prepared))
}

/// Load the artifacts for `(set, config, sample_rate)` from `dir`, building
/// and storing them on a miss. The flag is true on a cache hit.
pub fn prepare_cached(
    set: &HrtfSet,
    config: &LocalizationConfig,
    sample_rate: u32,
    dir: &Path,
) -> Result<(Prepared, bool)> {
    let key = artifact_key(set, config, sample_rate);
    if let Some(p) = load_prepared(dir, &key)? {
        return Ok((p, true));
    }
    let prepared = prepare(set, config, sample_rate)?;
    store_prepared(dir, &prepared)?;
    Ok((prepared, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hrtf::{interaural_grid, sphere_hrtf, DEFAULT_HEAD_RADIUS};

    fn small() -> (HrtfSet, LocalizationConfig) {
        let set = sphere_hrtf(DEFAULT_HEAD_RADIUS, &interaural_grid(20.0, 6), 16000).unwrap();
        let mut cfg = LocalizationConfig::default();
        cfg.frontend.fft_size = 256;
        cfg.frontend.hop = 128;
        cfg.search.lateral_step = 20.0;
        cfg.search.intraconic_samples = 6;
        (set, cfg)
    }

    #[test]
    fn miss_then_hit() {
        let dir = tempfile::tempdir().unwrap();
        let (set, cfg) = small();
        let (built, hit) = prepare_cached(&set, &cfg, 16000, dir.path()).unwrap();
        assert!(!hit);
        let (loaded, hit) = prepare_cached(&set, &cfg, 16000, dir.path()).unwrap();
        assert!(hit);
        assert_eq!(built, loaded);
    }

    #[test]
    fn corruption_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let (set, cfg) = small();
        let (built, _) = prepare_cached(&set, &cfg, 16000, dir.path()).unwrap();
        let path = entry_path(dir.path(), &built.key);
        let mut bytes = std::fs::read(&path).unwrap();
        let last = bytes.len() - 1;
        bytes[last] ^= 1;
        std::fs::write(&path, bytes).unwrap();
        match load_prepared(dir.path(), &built.key) {
            Err(Error::Checksum { path: p }) => assert_eq!(p, path),
            other => panic!("{other:?}"),
        }
        assert!(load_prepared(dir.path(), "absent").unwrap().is_none());
    }
}
