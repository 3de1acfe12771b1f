use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::filtering::{bin_shift, fast_len, filter_decimate, FftPair};
use super::{FrontendKind, TfRepresentation};
use crate::error::{Error, Result};
use crate::linalg::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    /// Periodic Hann.
    Hann,
    Rectangular,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StftParams {
    pub fft_size: usize,
    pub hop: usize,
    pub window: WindowKind,
    coefficients: Vec<f64>,
}

impl StftParams {
    pub fn new(fft_size: usize, hop: usize, window: WindowKind) -> Result<Self> {
        let coefficients = match window {
            WindowKind::Hann => (0..fft_size)
                .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / fft_size as f64).cos())
                .collect(),
            WindowKind::Rectangular => vec![1.0; fft_size],
            WindowKind::Custom => {
                return Err(Error::invalid(
                    "custom windows need coefficients, use StftParams::with_window",
                ))
            }
        };
        Self::build(fft_size, hop, window, coefficients)
    }

    pub fn hann(fft_size: usize, hop: usize) -> Result<Self> {
        Self::new(fft_size, hop, WindowKind::Hann)
    }

    /// 1536-point Hann window with 50% overlap.
    pub fn speech_default() -> Self {
        Self::hann(1536, 768).expect("valid default")
    }

    pub fn with_window(hop: usize, coefficients: Vec<f64>) -> Result<Self> {
        Self::build(coefficients.len(), hop, WindowKind::Custom, coefficients)
    }

    fn build(
        fft_size: usize,
        hop: usize,
        window: WindowKind,
        coefficients: Vec<f64>,
    ) -> Result<Self> {
        if fft_size == 0 || hop == 0 || hop > fft_size {
            return Err(Error::invalid(format!(
                "need 0 < hop <= fft_size, got hop {hop}, fft_size {fft_size}"
            )));
        }
        if coefficients.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid(
                "window coefficients must be finite and non-negative",
            ));
        }
        Ok(StftParams {
            fft_size,
            hop,
            window,
            coefficients,
        })
    }

    pub fn window_coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn n_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    pub fn frames_for(&self, len: usize) -> usize {
        if len < self.fft_size {
            0
        } else {
            (len - self.fft_size) / self.hop + 1
        }
    }

    fn check_len(&self, len: usize) -> Result<usize> {
        match self.frames_for(len) {
            0 => Err(Error::SignalTooShort {
                needed: self.fft_size,
                got: len,
            }),
            n => Ok(n),
        }
    }

    fn empty_tf(&self, sample_rate: u32) -> TfRepresentation {
        let n = self.fft_size as f64;
        let fs = sample_rate as f64;
        TfRepresentation {
            frontend: FrontendKind::Stft,
            frequencies: (0..self.n_bins()).map(|k| k as f64 * fs / n).collect(),
            time_steps: vec![self.hop as f64 / fs; self.n_bins()],
            channels: Vec::with_capacity(self.n_bins()),
        }
    }
}

/// Anti-causal taps of the band-pass filter equivalent to bin `k`:
/// `taps[i] = f[-i] = w[i] exp(-j 2 pi k i / N)`.
pub fn stft_filter_taps(params: &StftParams, k: usize) -> Vec<C64> {
    params
        .coefficients
        .iter()
        .enumerate()
        .map(|(i, &w)| bin_shift(k, i, params.fft_size) * w)
        .collect()
}

/// Windowed DFT with the phase referenced to absolute time:
/// `X[m, k] = sum_n x[n] w[n - m hop] exp(-j 2 pi k n / N)`.
/// Only bins `0..=N/2` are kept.
pub fn stft_analyze(
    signal: &[f64],
    sample_rate: u32,
    params: &StftParams,
) -> Result<TfRepresentation> {
    let frames = params.check_len(signal.len())?;
    let n = params.fft_size;
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut tf = params.empty_tf(sample_rate);
    tf.channels = vec![Vec::with_capacity(frames); params.n_bins()];
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for m in 0..frames {
        let start = m * params.hop;
        for ((b, &x), &w) in buf
            .iter_mut()
            .zip(&signal[start..start + n])
            .zip(&params.coefficients)
        {
            *b = C64::new(x * w, 0.0);
        }
        fft.process(&mut buf);
        for (k, ch) in tf.channels.iter_mut().enumerate() {
            ch.push(buf[k] * bin_shift(k, start, n));
        }
    }
    Ok(tf)
}

/// Same coefficients as [`stft_analyze`], computed by filtering the whole
/// signal with each bin's band-pass filter, shifting to baseband and keeping
/// every `hop`-th sample.
pub fn stft_via_filtering(
    signal: &[f64],
    sample_rate: u32,
    params: &StftParams,
) -> Result<TfRepresentation> {
    let frames = params.check_len(signal.len())?;
    let n = params.fft_size;
    let fft = FftPair::new(fast_len(signal.len() + n - 1));
    let spectrum = vec![fft.real_spectrum(signal)];
    let mut tf = params.empty_tf(sample_rate);
    for k in 0..params.n_bins() {
        let taps = stft_filter_taps(params, k);
        let mut out = filter_decimate(&fft, &spectrum, &taps, params.hop, frames, |tau| {
            bin_shift(k, tau, n)
        });
        tf.channels.push(out.pop().expect("one signal"));
    }
    Ok(tf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn params_validation() {
        assert!(StftParams::hann(0, 1).is_err());
        assert!(StftParams::hann(64, 0).is_err());
        assert!(StftParams::hann(64, 65).is_err());
        assert!(StftParams::with_window(4, vec![1.0, -1.0, 1.0, 1.0]).is_err());
        assert!(StftParams::with_window(4, vec![1.0, f64::NAN, 1.0, 1.0]).is_err());
        assert!(StftParams::new(64, 32, WindowKind::Custom).is_err());
        let p = StftParams::speech_default();
        assert_eq!((p.fft_size, p.hop, p.n_bins()), (1536, 768, 769));
    }

    #[test]
    fn too_short_signal_is_rejected() {
        let p = StftParams::hann(64, 32).unwrap();
        assert!(matches!(
            stft_analyze(&[0.0; 63], 8000, &p),
            Err(Error::SignalTooShort {
                needed: 64,
                got: 63
            })
        ));
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let p = StftParams::hann(64, 16).unwrap();
        let tf = stft_analyze(&[0.0; 300], 8000, &p).unwrap();
        assert!(tf
            .channels
            .iter()
            .flatten()
            .all(|c| *c == C64::new(0.0, 0.0)));
    }

    #[test]
    fn exact_bin_exponential_with_rectangular_window() {
        let n = 64;
        let k0 = 5;
        let p = StftParams::new(n, 16, WindowKind::Rectangular).unwrap();
        // Real cosine; its positive-frequency half carries amplitude 1/2.
        let x: Vec<f64> = (0..256)
            .map(|i| 2.0 * (2.0 * PI * (k0 * i) as f64 / n as f64).cos())
            .collect();
        let tf = stft_analyze(&x, 8000, &p).unwrap();
        for (k, ch) in tf.channels.iter().enumerate() {
            for c in ch {
                if k == k0 {
                    assert!((c.norm() - n as f64).abs() < 1e-9);
                } else {
                    assert!(c.norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn windowed_parseval() {
        let n = 1536;
        let p = StftParams::hann(n, n / 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x: Vec<f64> = (0..n * 6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let tf = stft_analyze(&x, 48000, &p).unwrap();
        for m in 0..tf.frames(0) {
            let direct: f64 = (0..n)
                .map(|i| (x[m * p.hop + i] * p.window_coefficients()[i]).powi(2))
                .sum();
            let spectral: f64 = (0..p.n_bins())
                .map(|k| {
                    let w = if k == 0 || k == n / 2 { 1.0 } else { 2.0 };
                    w * tf.channels[k][m].norm_sqr()
                })
                .sum::<f64>()
                / n as f64;
            assert!((spectral - direct).abs() <= 1e-6 * direct);
        }
    }

    #[test]
    fn filtering_route_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let coeffs: Vec<f64> = (0..48).map(|_| rng.gen_range(0.0..1.0)).collect();
        let p = StftParams::with_window(20, coeffs).unwrap();
        let x: Vec<f64> = (0..333).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a = stft_analyze(&x, 16000, &p).unwrap();
        let b = stft_via_filtering(&x, 16000, &p).unwrap();
        assert!(a.same_grid(&b));
        let scale = a
            .channels
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        for (ca, cb) in a.channels.iter().flatten().zip(b.channels.iter().flatten()) {
            assert!((ca - cb).norm() <= 1e-9 * scale);
        }
    }

    #[test]
    fn filter_taps_are_the_modulated_window() {
        let p = StftParams::hann(32, 8).unwrap();
        let k = 3;
        let taps = stft_filter_taps(&p, k);
        for (i, t) in taps.iter().enumerate() {
            let w = p.window_coefficients()[i];
            let expect = C64::from_polar(w, -2.0 * PI * (k * i) as f64 / 32.0);
            assert!((t - expect).norm() < 1e-14);
        }
        // Periodic Hann is symmetric about sample N/2.
        for i in 1..16 {
            assert!(
                (p.window_coefficients()[16 + i] - p.window_coefficients()[16 - i]).abs() < 1e-15
            );
        }
    }

    #[test]
    fn impulse_response_per_frame() {
        let n = 64;
        let hop = 16;
        let n0 = 100;
        let p = StftParams::hann(n, hop).unwrap();
        let mut x = vec![0.0; 256];
        x[n0] = 1.0;
        let tf = stft_via_filtering(&x, 8000, &p).unwrap();
        for k in [0usize, 7, 32] {
            for m in 0..tf.frames(k) {
                let t = m as i64 * hop as i64 - n0 as i64;
                // f[t] = w[-t] e^{j w t}, non-zero for -N < t <= 0.
                let f = if t <= 0 && -t < n as i64 {
                    let w = p.window_coefficients()[(-t) as usize];
                    C64::from_polar(w, 2.0 * PI * k as f64 * t as f64 / n as f64)
                } else {
                    C64::new(0.0, 0.0)
                };
                let expect = f * C64::from_polar(1.0, -2.0 * PI * (k * m * hop) as f64 / n as f64);
                assert!((tf.channels[k][m] - expect).norm() < 1e-12);
            }
        }
    }
}
