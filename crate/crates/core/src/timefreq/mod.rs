//! Time-frequency front-ends: windowed STFT and the one-sided gammatone
//! auditory filter bank (AFB), both expressed as band-pass filtering followed
//! by a baseband shift and per-channel decimation.

mod afb;
mod container;
mod erb;
mod filtering;
mod stft;

pub use afb::{afb_analyze, afb_analyze_direct};
pub use container::{read_tf, read_tf_from, write_tf, write_tf_to};
pub use erb::{
    erb_hz, erb_rate, erb_rate_to_hz, ErbBank, ErbBankParams, ErbChannel,
    GAMMATONE_BANDWIDTH_FACTOR,
};
pub use filtering::fast_len;
pub use stft::{stft_analyze, stft_filter_taps, stft_via_filtering, StftParams, WindowKind};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Two-channel waveform, `left`/`right` of equal length.
#[derive(Clone, Debug, PartialEq)]
pub struct BinauralSignal {
    left: Vec<f64>,
    right: Vec<f64>,
    sample_rate: u32,
}

impl BinauralSignal {
    pub fn new(left: Vec<f64>, right: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if left.len() != right.len() {
            return Err(Error::invalid(format!(
                "left/right lengths differ: {} vs {}",
                left.len(),
                right.len()
            )));
        }
        if sample_rate == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        Ok(BinauralSignal {
            left,
            right,
            sample_rate,
        })
    }

    pub fn left(&self) -> &[f64] {
        &self.left
    }

    pub fn right(&self) -> &[f64] {
        &self.right
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>, u32) {
        (self.left, self.right, self.sample_rate)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrontendKind {
    Stft,
    Afb,
}

impl FrontendKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FrontendKind::Stft => "stft",
            FrontendKind::Afb => "afb",
        }
    }
}

impl std::str::FromStr for FrontendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "stft" => Ok(FrontendKind::Stft),
            "afb" => Ok(FrontendKind::Afb),
            other => Err(Error::invalid(format!(
                "unknown front-end '{other}' (expected stft or afb)"
            ))),
        }
    }
}

impl std::fmt::Display for FrontendKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Complex time-frequency coefficients. Each channel has its own frame
/// interval; frame `m` of channel `c` is stamped `m * time_steps[c]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TfRepresentation {
    pub frontend: FrontendKind,
    pub frequencies: Vec<f64>,
    pub time_steps: Vec<f64>,
    pub channels: Vec<Vec<C64>>,
}

impl TfRepresentation {
    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn frames(&self, channel: usize) -> usize {
        self.channels[channel].len()
    }

    pub fn total_bins(&self) -> usize {
        self.channels.iter().map(Vec::len).sum()
    }

    /// Same frequencies, steps and per-channel frame counts.
    pub fn same_grid(&self, other: &TfRepresentation) -> bool {
        self.frontend == other.frontend
            && self.frequencies == other.frequencies
            && self.time_steps == other.time_steps
            && self
                .channels
                .iter()
                .zip(&other.channels)
                .all(|(a, b)| a.len() == b.len())
            && self.channels.len() == other.channels.len()
    }

    /// Keep only the listed channels.
    pub fn select(&self, indices: &[usize]) -> TfRepresentation {
        TfRepresentation {
            frontend: self.frontend,
            frequencies: indices.iter().map(|&i| self.frequencies[i]).collect(),
            time_steps: indices.iter().map(|&i| self.time_steps[i]).collect(),
            channels: indices.iter().map(|&i| self.channels[i].clone()).collect(),
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.frequencies.len() != self.channels.len()
            || self.time_steps.len() != self.channels.len()
        {
            return Err(Error::invalid("channel table does not match channel count"));
        }
        if self.time_steps.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::invalid("time steps must be positive"));
        }
        Ok(())
    }
}

/// Analysis front-end applied to both ears.
#[derive(Clone, Debug)]
pub enum Frontend {
    Stft(StftParams),
    Afb(ErbBank),
}

impl Frontend {
    pub fn kind(&self) -> FrontendKind {
        match self {
            Frontend::Stft(_) => FrontendKind::Stft,
            Frontend::Afb(_) => FrontendKind::Afb,
        }
    }

    /// Centre frequencies of every channel this front-end produces.
    pub fn frequencies(&self, sample_rate: u32) -> Vec<f64> {
        match self {
            Frontend::Stft(p) => (0..=p.fft_size / 2)
                .map(|k| k as f64 * sample_rate as f64 / p.fft_size as f64)
                .collect(),
            Frontend::Afb(bank) => bank.centers(),
        }
    }

    /// Front-end producing only the listed channels. For the STFT every bin
    /// is computed anyway and the selection happens afterwards.
    pub fn restricted(&self, channels: &[usize]) -> Frontend {
        match self {
            Frontend::Stft(p) => Frontend::Stft(p.clone()),
            Frontend::Afb(bank) => Frontend::Afb(bank.subset(channels)),
        }
    }
}

/// Run the chosen front-end on both ears.
pub fn binaural_analyze(
    signal: &BinauralSignal,
    frontend: &Frontend,
) -> Result<(TfRepresentation, TfRepresentation)> {
    let fs = signal.sample_rate();
    match frontend {
        Frontend::Stft(params) => {
            let l = stft_analyze(signal.left(), fs, params)?;
            let r = stft_analyze(signal.right(), fs, params)?;
            Ok((l, r))
        }
        Frontend::Afb(bank) => {
            if bank.sample_rate() != fs {
                return Err(Error::SampleRateMismatch(bank.sample_rate(), fs));
            }
            let mut out = afb::afb_analyze_many(&[signal.left(), signal.right()], bank)?;
            let r = out.pop().expect("two outputs");
            let l = out.pop().expect("two outputs");
            Ok((l, r))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn binaural_signal_rejects_length_mismatch() {
        assert!(BinauralSignal::new(vec![0.0; 3], vec![0.0; 4], 48000).is_err());
        assert!(BinauralSignal::new(vec![0.0; 3], vec![0.0; 3], 0).is_err());
    }

    #[test]
    fn identical_ears_give_identical_coefficients() {
        let x: Vec<f64> = (0..6000)
            .map(|n| ((n * 7919) % 101) as f64 / 50.0 - 1.0)
            .collect();
        let sig = BinauralSignal::new(x.clone(), x, 16000).unwrap();
        let bank = ErbBank::new(ErbBankParams::new(200.0, 4000.0, 6, 16000)).unwrap();
        for fe in [
            Frontend::Stft(StftParams::hann(512, 256).unwrap()),
            Frontend::Afb(bank),
        ] {
            let (l, r) = binaural_analyze(&sig, &fe).unwrap();
            assert_eq!(l, r);
        }
    }

    #[test]
    fn interaural_phase_of_delayed_tone() {
        let fs = 16000;
        let n_fft = 256;
        let k = 24;
        let delay = 3usize;
        let w = 2.0 * PI * k as f64 / n_fft as f64;
        let x: Vec<f64> = (0..4096 + delay).map(|n| (w * n as f64).cos()).collect();
        let left = x[delay..].to_vec();
        let right = x[..x.len() - delay].to_vec();
        let sig = BinauralSignal::new(left, right, fs).unwrap();
        let (l, r) =
            binaural_analyze(&sig, &Frontend::Stft(StftParams::hann(n_fft, 128).unwrap())).unwrap();
        let expected = (w * delay as f64).rem_euclid(2.0 * PI);
        for m in 0..l.frames(k) {
            let ipd = (l.channels[k][m] * r.channels[k][m].conj())
                .arg()
                .rem_euclid(2.0 * PI);
            assert!((ipd - expected).abs() < 1e-9, "{ipd} vs {expected}");
        }
    }

    #[test]
    fn minimum_length_signal_gives_one_frame() {
        let sig = BinauralSignal::new(vec![0.5; 512], vec![0.25; 512], 16000).unwrap();
        let (l, r) =
            binaural_analyze(&sig, &Frontend::Stft(StftParams::hann(512, 256).unwrap())).unwrap();
        assert!(l.channels.iter().all(|c| c.len() == 1));
        assert!(l.same_grid(&r));
    }
}
