//! FFT-domain anti-causal filtering followed by baseband shift and
//! decimation. Shared by the STFT-as-filter route and the AFB.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::linalg::C64;

/// Smallest `2^a 3^b 5^c` not below `n`.
pub fn fast_len(n: usize) -> usize {
    let n = n.max(1);
    let mut best = n.next_power_of_two();
    let mut p5 = 1usize;
    while p5 < best {
        let mut p35 = p5;
        while p35 < best {
            let mut v = p35;
            while v < n {
                v *= 2;
            }
            best = best.min(v);
            p35 *= 3;
        }
        p5 *= 5;
    }
    best
}

/// Forward/inverse plans of one transform length.
pub(crate) struct FftPair {
    pub len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftPair {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftPair {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn forward(&self, buf: &mut [C64]) {
        self.forward.process(buf);
    }

    /// Unnormalised inverse.
    pub fn inverse(&self, buf: &mut [C64]) {
        self.inverse.process(buf);
    }

    /// Spectrum of a real signal zero-padded to the transform length.
    pub fn real_spectrum(&self, x: &[f64]) -> Vec<C64> {
        let mut buf = vec![C64::new(0.0, 0.0); self.len];
        for (b, &v) in buf.iter_mut().zip(x) {
            b.re = v;
        }
        self.forward(&mut buf);
        buf
    }

    /// Spectrum of the causal time-reversed copy of anti-causal taps,
    /// `f[i] = taps[L-1-i]`.
    pub fn reversed_taps_spectrum(&self, taps: &[C64]) -> Vec<C64> {
        let mut buf = vec![C64::new(0.0, 0.0); self.len];
        for (b, t) in buf.iter_mut().zip(taps.iter().rev()) {
            *b = *t;
        }
        self.forward(&mut buf);
        buf
    }
}

/// Decimated anti-causal filter outputs for one or more signals.
///
/// For each signal spectrum computes `y[tau] = sum_k x[tau + k] taps[k]`
/// (with `x` zero past its end) and returns `shift(tau) * y[tau]` at
/// `tau = m * decimation`, `m < frames`. The transform length must be at
/// least `signal_len + taps.len() - 1` so the linear convolution does not wrap.
pub(crate) fn filter_decimate(
    fft: &FftPair,
    spectra: &[Vec<C64>],
    taps: &[C64],
    decimation: usize,
    frames: usize,
    shift: impl Fn(usize) -> C64,
) -> Vec<Vec<C64>> {
    let offset = taps.len() - 1;
    let filter = fft.reversed_taps_spectrum(taps);
    let scale = 1.0 / fft.len as f64;
    let mut work = vec![C64::new(0.0, 0.0); fft.len];
    spectra
        .iter()
        .map(|spec| {
            for ((w, s), f) in work.iter_mut().zip(spec).zip(&filter) {
                *w = s * f;
            }
            fft.inverse(&mut work);
            (0..frames)
                .map(|m| {
                    let tau = m * decimation;
                    work[tau + offset] * scale * shift(tau)
                })
                .collect()
        })
        .collect()
}

/// `exp(-j 2 pi k tau / n)` with the phase index reduced exactly.
#[inline]
pub(crate) fn bin_shift(k: usize, tau: usize, n: usize) -> C64 {
    let r = ((k as u128 * tau as u128) % n as u128) as f64;
    C64::from_polar(1.0, -2.0 * std::f64::consts::PI * r / n as f64)
}
