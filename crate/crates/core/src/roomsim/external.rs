//! Measured BRIR pairs: a stereo WAV plus a JSON sidecar next to it.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::image::{Brir, Provenance};
use crate::audio::{read_wav, write_wav};
use crate::error::{Error, Result};
use crate::hrtf::Direction;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrirSidecar {
    pub direction: Direction,
    /// Metres.
    pub distance: f64,
    pub sample_rate: u32,
}

/// Load `name.wav` and `name.json`.
pub fn load_external_brir(wav: impl AsRef<Path>) -> Result<(Brir, BrirSidecar)> {
    let wav = wav.as_ref();
    let sidecar_path = wav.with_extension("json");
    let text = std::fs::read_to_string(&sidecar_path).map_err(|e| Error::io(&sidecar_path, e))?;
    let sidecar: BrirSidecar =
        serde_json::from_str(&text).map_err(|e| Error::malformed(&sidecar_path, e.to_string()))?;
    if !sidecar.direction.is_valid() || !(sidecar.distance > 0.0) {
        return Err(Error::malformed(
            &sidecar_path,
            "direction or distance out of range",
        ));
    }
    let (mut channels, fs) = read_wav(wav)?;
    if channels.len() != 2 {
        return Err(Error::malformed(
            wav,
            format!("expected stereo, found {} channels", channels.len()),
        ));
    }
    if fs != sidecar.sample_rate {
        return Err(Error::SampleRateMismatch(sidecar.sample_rate, fs));
    }
    let right = channels.pop().unwrap();
    let left = channels.pop().unwrap();
    if left.iter().chain(&right).any(|v| !v.is_finite()) {
        return Err(Error::malformed(wav, "non-finite samples"));
    }
    Ok((
        Brir {
            left,
            right,
            sample_rate: fs,
            direction: sidecar.direction,
            provenance: Provenance::External,
        },
        sidecar,
    ))
}

/// Write a BRIR in the same layout, e.g. to export a simulated one.
pub fn save_external_brir(wav: impl AsRef<Path>, brir: &Brir, distance: f64) -> Result<()> {
    let wav = wav.as_ref();
    write_wav(wav, &[&brir.left, &brir.right], brir.sample_rate)?;
    let sidecar = BrirSidecar {
        direction: brir.direction,
        distance,
        sample_rate: brir.sample_rate,
    };
    let path = wav.with_extension("json");
    std::fs::write(&path, serde_json::to_string_pretty(&sidecar)?).map_err(|e| Error::io(&path, e))
}
