//! Binary container for [`TfRepresentation`].
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic      8 bytes  "BDOATF01"
//! frontend   u8       0 = STFT, 1 = AFB
//! channels   u32
//! table      per channel: f64 frequency (Hz), f64 time step (s), u64 frames
//! payload    per channel, per frame: f32 re, f32 im
//! ```
//!
//! Coefficients are stored as complex64, so a round trip rounds them to f32.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use super::{FrontendKind, TfRepresentation};
use crate::error::{Error, Result};
use crate::linalg::C64;

const MAGIC: &[u8; 8] = b"BDOATF01";

pub fn write_tf(path: impl AsRef<Path>, tf: &TfRepresentation) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_tf_to(&mut w, tf).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_tf_to<W: Write>(w: &mut W, tf: &TfRepresentation) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&[match tf.frontend {
        FrontendKind::Stft => 0u8,
        FrontendKind::Afb => 1u8,
    }])?;
    w.write_all(&(tf.channels.len() as u32).to_le_bytes())?;
    for ((f, s), ch) in tf.frequencies.iter().zip(&tf.time_steps).zip(&tf.channels) {
        w.write_all(&f.to_le_bytes())?;
        w.write_all(&s.to_le_bytes())?;
        w.write_all(&(ch.len() as u64).to_le_bytes())?;
    }
    for ch in &tf.channels {
        for c in ch {
            w.write_all(&(c.re as f32).to_le_bytes())?;
            w.write_all(&(c.im as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_tf(path: impl AsRef<Path>) -> Result<TfRepresentation> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_tf_from(&mut BufReader::new(file), path)
}

/// Parse a container from `r`; `origin` only labels errors.
pub fn read_tf_from<R: Read>(r: &mut R, origin: &Path) -> Result<TfRepresentation> {
    let origin: PathBuf = origin.to_path_buf();
    let bad = |reason: &str| Error::malformed(&origin, reason);
    let mut take = |n: usize| -> Result<Vec<u8>> {
        let mut buf = vec![0u8; n];
        r.read_exact(&mut buf).map_err(|_| bad("truncated"))?;
        Ok(buf)
    };

    if take(8)? != MAGIC {
        return Err(bad("bad magic"));
    }
    let frontend = match take(1)?[0] {
        0 => FrontendKind::Stft,
        1 => FrontendKind::Afb,
        t => return Err(bad(&format!("unknown frontend tag {t}"))),
    };
    let n = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let mut frequencies = Vec::with_capacity(n.min(4096));
    let mut time_steps = Vec::with_capacity(n.min(4096));
    let mut frames = Vec::with_capacity(n.min(4096));
    for _ in 0..n {
        let row = take(24)?;
        frequencies.push(f64::from_le_bytes(row[0..8].try_into().unwrap()));
        time_steps.push(f64::from_le_bytes(row[8..16].try_into().unwrap()));
        frames.push(u64::from_le_bytes(row[16..24].try_into().unwrap()) as usize);
    }
    let mut channels = Vec::with_capacity(n.min(4096));
    for &count in &frames {
        let raw = take(
            count
                .checked_mul(8)
                .ok_or_else(|| bad("frame count overflow"))?,
        )?;
        let ch: Vec<C64> = raw
            .chunks_exact(8)
            .map(|b| {
                C64::new(
                    f32::from_le_bytes(b[0..4].try_into().unwrap()) as f64,
                    f32::from_le_bytes(b[4..8].try_into().unwrap()) as f64,
                )
            })
            .collect();
        channels.push(ch);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(|e| Error::io(&origin, e))? != 0 {
        return Err(bad("trailing bytes"));
    }
    let tf = TfRepresentation {
        frontend,
        frequencies,
        time_steps,
        channels,
    };
    tf.validate().map_err(|e| bad(&e.to_string()))?;
    Ok(tf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TfRepresentation {
        TfRepresentation {
            frontend: FrontendKind::Afb,
            frequencies: vec![100.0, 200.0],
            time_steps: vec![0.01, 0.005],
            channels: vec![
                vec![C64::new(1.5, -2.0); 3],
                vec![C64::new(0.25, 0.125), C64::new(-4.0, 8.0)],
            ],
        }
    }

    #[test]
    fn roundtrip_in_memory() {
        let tf = sample();
        let mut buf = Vec::new();
        write_tf_to(&mut buf, &tf).unwrap();
        let back = read_tf_from(&mut buf.as_slice(), Path::new("mem")).unwrap();
        assert_eq!(back, tf);
    }

    #[test]
    fn roundtrip_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.tf");
        write_tf(&path, &sample()).unwrap();
        assert_eq!(read_tf(&path).unwrap(), sample());
    }

    #[test]
    fn rejects_garbage() {
        let mut buf = Vec::new();
        write_tf_to(&mut buf, &sample()).unwrap();
        let mut truncated = buf.clone();
        truncated.pop();
        assert!(matches!(
            read_tf_from(&mut truncated.as_slice(), Path::new("t")),
            Err(Error::Malformed { .. })
        ));
        let mut wrong = buf.clone();
        wrong[0] = b'X';
        assert!(read_tf_from(&mut wrong.as_slice(), Path::new("t")).is_err());
        buf.push(0);
        assert!(read_tf_from(&mut buf.as_slice(), Path::new("t")).is_err());
    }
}
