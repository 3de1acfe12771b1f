//! HRTF container format and per-direction WAV import.
//!
//! Container layout:
//!
//! ```text
//! magic        8 bytes  "BDOAHRTF"
//! header_len   u32 LE
//! header       JSON {version, sample_rate, ir_length, directions: [{az, el}], checksum}
//! payload      f32 LE; per direction the left IR then the right IR
//! ```
//!
//! `checksum` is the hex SHA-256 of the payload bytes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::coords::Direction;
use super::set::HrtfSet;
use crate::audio::read_wav;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"BDOAHRTF";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    version: u32,
    sample_rate: u32,
    ir_length: usize,
    directions: Vec<Direction>,
    checksum: String,
}

pub fn encode_hrtf(set: &HrtfSet) -> Vec<u8> {
    let mut payload = Vec::with_capacity(set.len() * set.ir_length() * 8);
    for i in 0..set.len() {
        for &v in set.left(i).iter().chain(set.right(i)) {
            payload.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    let header = Header {
        version: VERSION,
        sample_rate: set.sample_rate(),
        ir_length: set.ir_length(),
        directions: set.directions().to_vec(),
        checksum: hex::encode(Sha256::digest(&payload)),
    };
    let json = serde_json::to_vec(&header).expect("header serialises");
    let mut out = Vec::with_capacity(12 + json.len() + payload.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&payload);
    out
}

/// Parse container bytes; `origin` labels errors.
pub fn decode_hrtf(bytes: &[u8], origin: &Path) -> Result<HrtfSet> {
    let bad = |reason: &str| Error::malformed(origin, reason);
    if bytes.len() < 12 || &bytes[..8] != MAGIC {
        return Err(bad("not an HRTF container"));
    }
    let header_len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let header_end = 12usize
        .checked_add(header_len)
        .filter(|&e| e <= bytes.len());
    let header_end = header_end.ok_or_else(|| bad("truncated header"))?;
    let header: Header =
        serde_json::from_slice(&bytes[12..header_end]).map_err(|e| bad(&format!("header: {e}")))?;
    if header.version != VERSION {
        return Err(bad(&format!("unsupported version {}", header.version)));
    }
    let payload = &bytes[header_end..];
    let expected = header.directions.len() * header.ir_length * 2 * 4;
    if payload.len() != expected {
        return Err(bad(&format!(
            "payload is {} bytes, expected {expected}",
            payload.len()
        )));
    }
    if hex::encode(Sha256::digest(payload)) != header.checksum {
        return Err(Error::Checksum {
            path: origin.to_path_buf(),
        });
    }
    let n = header.ir_length;
    let mut left = Vec::with_capacity(header.directions.len());
    let mut right = Vec::with_capacity(header.directions.len());
    let samples: Vec<f64> = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
        .collect();
    for block in samples.chunks_exact(2 * n) {
        left.push(block[..n].to_vec());
        right.push(block[n..].to_vec());
    }
    HrtfSet::new(header.sample_rate, header.directions, left, right)
}

/// Hex SHA-256 of the container bytes of `set`.
pub fn hrtf_digest(set: &HrtfSet) -> String {
    hex::encode(Sha256::digest(encode_hrtf(set)))
}

pub fn save_hrtf(path: impl AsRef<Path>, set: &HrtfSet) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_hrtf(set)).map_err(|e| Error::io(path, e))
}

pub fn load_hrtf(path: impl AsRef<Path>) -> Result<HrtfSet> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_hrtf(&bytes, path)
}

/// Parse `AZ<az>_EL<el>.wav` (case-insensitive), e.g. `AZ090_EL-30.wav`.
pub fn parse_direction_name(name: &str) -> Option<Direction> {
    let upper = name.to_ascii_uppercase();
    let stem = upper.strip_suffix(".WAV")?;
    let rest = stem.strip_prefix("AZ")?;
    let (az, el) = rest.split_once("_EL")?;
    let az: f64 = az.parse().ok()?;
    let el: f64 = el.parse().ok()?;
    if !(-90.0..=90.0).contains(&el) || !az.is_finite() {
        return None;
    }
    Some(Direction::new(az, el))
}

/// Build a set from a directory of stereo WAV files named
/// `AZxxx_ELyyy.wav`. Other files are ignored; responses are zero-padded to
/// the longest one.
pub fn import_wav_dir(dir: impl AsRef<Path>) -> Result<HrtfSet> {
    let dir = dir.as_ref();
    let mut entries: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().to_string_lossy().into_owned();
            parse_direction_name(&name).map(|d| (name, d, e.path()))
        })
        .collect();
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    if entries.is_empty() {
        return Err(Error::malformed(dir, "no AZxxx_ELyyy.wav files found"));
    }
    let mut sample_rate = None;
    let mut directions = Vec::new();
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (_, d, path) in entries {
        let (mut ch, fs) = read_wav(&path)?;
        if ch.len() != 2 {
            return Err(Error::malformed(
                &path,
                format!("expected stereo, found {} channels", ch.len()),
            ));
        }
        match sample_rate {
            None => sample_rate = Some(fs),
            Some(r) if r != fs => return Err(Error::SampleRateMismatch(r, fs)),
            _ => {}
        }
        right.push(ch.pop().unwrap());
        left.push(ch.pop().unwrap());
        directions.push(d);
    }
    HrtfSet::from_padded(sample_rate.unwrap(), directions, left, right)
}
