//! PCM WAV reading and writing.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};
use crate::timefreq::BinauralSignal;

/// Deinterleaved channels scaled to `[-1, 1]` and the sample rate.
/// Accepts 8/16/24/32-bit integer and 32-bit float PCM.
pub fn read_wav(path: impl AsRef<Path>) -> Result<(Vec<Vec<f64>>, u32)> {
    let path = path.as_ref();
    let reader = WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::malformed(path, other.to_string()),
    })?;
    let spec = reader.spec();
    let n_ch = spec.channels as usize;
    if n_ch == 0 {
        return Err(Error::malformed(path, "no channels"));
    }
    let interleaved: Vec<f64> = match spec.sample_format {
        SampleFormat::Float => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()?,
        SampleFormat::Int => {
            let scale = 1.0 / (1u64 << (spec.bits_per_sample - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<std::result::Result<_, _>>()?
        }
    };
    let mut channels = vec![Vec::with_capacity(interleaved.len() / n_ch); n_ch];
    for frame in interleaved.chunks_exact(n_ch) {
        for (ch, &v) in channels.iter_mut().zip(frame) {
            ch.push(v);
        }
    }
    Ok((channels, spec.sample_rate))
}

pub fn read_mono(path: impl AsRef<Path>) -> Result<(Vec<f64>, u32)> {
    let path = path.as_ref();
    let (mut channels, fs) = read_wav(path)?;
    if channels.len() != 1 {
        return Err(Error::malformed(
            path,
            format!("expected mono, found {} channels", channels.len()),
        ));
    }
    Ok((channels.pop().unwrap(), fs))
}

pub fn read_binaural(path: impl AsRef<Path>) -> Result<BinauralSignal> {
    let path = path.as_ref();
    let (mut channels, fs) = read_wav(path)?;
    if channels.len() != 2 {
        return Err(Error::malformed(
            path,
            format!("expected stereo, found {} channels", channels.len()),
        ));
    }
    let right = channels.pop().unwrap();
    let left = channels.pop().unwrap();
    BinauralSignal::new(left, right, fs)
}

/// Write 32-bit float PCM; all channels must have the same length.
pub fn write_wav(path: impl AsRef<Path>, channels: &[&[f64]], sample_rate: u32) -> Result<()> {
    let path = path.as_ref();
    let len = channels.first().map_or(0, |c| c.len());
    if channels.is_empty() || channels.iter().any(|c| c.len() != len) {
        return Err(Error::invalid(
            "channels must be non-empty and of equal length",
        ));
    }
    let spec = WavSpec {
        channels: channels.len() as u16,
        sample_rate,
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut writer = WavWriter::create(path, spec)?;
    for n in 0..len {
        for ch in channels {
            writer.write_sample(ch[n] as f32)?;
        }
    }
    writer.finalize()?;
    Ok(())
}

pub fn write_binaural(path: impl AsRef<Path>, signal: &BinauralSignal) -> Result<()> {
    write_wav(path, &[signal.left(), signal.right()], signal.sample_rate())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.wav");
        let sig =
            BinauralSignal::new(vec![0.5, -0.25, 0.0], vec![0.125, 1.0, -1.0], 22050).unwrap();
        write_binaural(&p, &sig).unwrap();
        assert_eq!(read_binaural(&p).unwrap(), sig);
        assert!(read_mono(&p).is_err());
    }

    #[test]
    fn int16_is_scaled() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.wav");
        let spec = WavSpec {
            channels: 1,
            sample_rate: 8000,
            bits_per_sample: 16,
            sample_format: SampleFormat::Int,
        };
        let mut w = WavWriter::create(&p, spec).unwrap();
        for v in [16384i16, -32768, 0] {
            w.write_sample(v).unwrap();
        }
        w.finalize().unwrap();
        let (x, fs) = read_mono(&p).unwrap();
        assert_eq!(fs, 8000);
        assert_eq!(x, vec![0.5, -1.0, 0.0]);
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            read_wav("/nonexistent/x.wav"),
            Err(Error::Io { .. })
        ));
    }
}
