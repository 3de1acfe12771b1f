//! Rendering scenarios to binaural signals, a synthetic speech-like source
//! and Schroeder decay analysis.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use super::image::Brir;
use super::scenario::RoomScenario;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::timefreq::{fast_len, BinauralSignal};

/// Linear convolution of `x` and `h` through one FFT.
pub fn fft_convolve(x: &[f64], h: &[f64]) -> Vec<f64> {
    if x.is_empty() || h.is_empty() {
        return Vec::new();
    }
    let out_len = x.len() + h.len() - 1;
    // The packed transform leaks rounding noise of one input into the
    // other; keep an all-zero input exactly zero.
    if x.iter().all(|&v| v == 0.0) || h.iter().all(|&v| v == 0.0) {
        return vec![0.0; out_len];
    }
    let n = fast_len(out_len);
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    // Pack x in the real part and h in the imaginary part, then separate.
    let mut a = vec![C64::new(0.0, 0.0); n];
    for (slot, &v) in a.iter_mut().zip(x) {
        slot.re = v;
    }
    for (slot, &v) in a.iter_mut().zip(h) {
        slot.im = v;
    }
    fwd.process(&mut a);
    let mut prod = vec![C64::new(0.0, 0.0); n];
    for k in 0..n {
        let zk = a[k];
        let zn = a[(n - k) % n].conj();
        let xk = (zk + zn) * 0.5;
        let hk = (zk - zn) * C64::new(0.0, -0.5);
        prod[k] = xk * hk;
    }
    inv.process(&mut prod);
    prod[..out_len].iter().map(|v| v.re / n as f64).collect()
}

/// Zero-phase brick-wall band-pass through one FFT of the whole signal.
pub fn band_limit(x: &[f64], sample_rate: u32, lo: f64, hi: f64) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    // Twice the length keeps the filter ringing from wrapping around.
    let n = fast_len(2 * x.len());
    let mut planner = FftPlanner::new();
    let mut buf: Vec<C64> = x
        .iter()
        .map(|&v| C64::new(v, 0.0))
        .chain(std::iter::repeat(C64::new(0.0, 0.0)))
        .take(n)
        .collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let df = sample_rate as f64 / n as f64;
    for (k, v) in buf.iter_mut().enumerate() {
        let f = k.min(n - k) as f64 * df;
        if f < lo || f > hi {
            *v = C64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf[..x.len()].iter().map(|v| v.re / n as f64).collect()
}

/// Rendered scenario plus the scale applied to the noise.
#[derive(Clone, Debug)]
pub struct Synthesized {
    pub signal: BinauralSignal,
    pub truth_lateral: f64,
    pub noise_gain: f64,
}

/// Convolve `speech` with each ear of the BRIR and add independent white
/// Gaussian noise per ear so that total signal power over total noise
/// power equals the scenario SNR.
pub fn synthesize(
    scenario: &RoomScenario,
    brir: &Brir,
    speech: &[f64],
    speech_rate: u32,
) -> Result<Synthesized> {
    render_brir(brir, speech, speech_rate, scenario.snr, scenario.seed)
}

/// [`synthesize`] for a BRIR without a scenario, e.g. a measured one.
/// The noise is drawn from `seed`.
pub fn render_brir(
    brir: &Brir,
    speech: &[f64],
    speech_rate: u32,
    snr: Option<f64>,
    seed: u64,
) -> Result<Synthesized> {
    if speech_rate != brir.sample_rate {
        return Err(Error::SampleRateMismatch(brir.sample_rate, speech_rate));
    }
    if speech.is_empty() {
        return Err(Error::invalid("empty speech signal"));
    }
    let mut left = fft_convolve(speech, &brir.left);
    let mut right = fft_convolve(speech, &brir.right);
    let mut noise_gain = 0.0;
    if let Some(snr) = snr {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let nl: Vec<f64> = (0..left.len())
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let nr: Vec<f64> = (0..right.len())
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let ps: f64 = left.iter().chain(&right).map(|v| v * v).sum();
        let pn: f64 = nl.iter().chain(&nr).map(|v| v * v).sum();
        noise_gain = (ps / (pn * 10f64.powf(snr / 10.0))).sqrt();
        for (v, n) in left.iter_mut().zip(&nl) {
            *v += noise_gain * n;
        }
        for (v, n) in right.iter_mut().zip(&nr) {
            *v += noise_gain * n;
        }
    }
    Ok(Synthesized {
        signal: BinauralSignal::new(left, right, brir.sample_rate)?,
        truth_lateral: brir.direction.to_interaural().lateral,
        noise_gain,
    })
}

/// Deterministic speech-like test signal: syllables of voiced harmonic
/// complexes with formant envelopes and short unvoiced noise bursts,
/// separated by pauses. RMS is 0.1.
pub fn speech_like(seconds: f64, sample_rate: u32, seed: u64) -> Vec<f64> {
    let fs = sample_rate as f64;
    let n = (seconds * fs).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![0.0; n];
    let mut pos = (rng.gen_range(0.02..0.08) * fs) as usize;
    let top = (0.45 * fs).min(7000.0);
    while pos < n {
        let dur = (rng.gen_range(0.12..0.3) * fs) as usize;
        let end = (pos + dur).min(n);
        if rng.gen_bool(0.8) {
            let f0 = rng.gen_range(100.0..220.0);
            let glide = rng.gen_range(-0.25..0.25);
            let formants = [
                (rng.gen_range(300.0..900.0), 90.0),
                (rng.gen_range(900.0..2500.0), 120.0),
                (rng.gen_range(2500.0..3500.0), 200.0),
            ];
            let n_harm = (top / f0) as usize;
            let amps: Vec<f64> = (1..=n_harm)
                .map(|h| {
                    let f = h as f64 * f0;
                    let shape: f64 = formants
                        .iter()
                        .map(|(c, bw)| 1.0 / (1.0 + ((f - c) / bw).powi(2)))
                        .sum();
                    (shape + 0.02) / (h as f64).sqrt()
                })
                .collect();
            let mut phase = 0.0;
            for (i, v) in out[pos..end].iter_mut().enumerate() {
                let t = i as f64 / (end - pos) as f64;
                let f = f0 * (1.0 + glide * t);
                phase += 2.0 * PI * f / fs;
                let env = (PI * t).sin().powi(2);
                let mut s = 0.0;
                for (h, a) in amps.iter().enumerate() {
                    if (h + 1) as f64 * f < top {
                        s += a * ((h + 1) as f64 * phase).sin();
                    }
                }
                *v += env * s;
            }
        } else {
            let mut prev = 0.0;
            for (i, v) in out[pos..end].iter_mut().enumerate() {
                let t = i as f64 / (end - pos) as f64;
                let w: f64 = StandardNormal.sample(&mut rng);
                // First difference tilts the burst towards high frequencies.
                *v += 0.5 * (PI * t).sin().powi(2) * (w - prev);
                prev = w;
            }
        }
        pos = end + (rng.gen_range(0.03..0.15) * fs) as usize;
    }
    let rms = (out.iter().map(|v| v * v).sum::<f64>() / n.max(1) as f64).sqrt();
    if rms > 0.0 {
        out.iter_mut().for_each(|v| *v *= 0.1 / rms);
    }
    out
}

/// Reverberation time from backward-integrated energy: a least-squares
/// line over the -5 to -25 dB part of the decay, extrapolated to -60 dB.
/// `None` if the decay never reaches -25 dB.
pub fn schroeder_t60(ir: &[f64], sample_rate: u32) -> Option<f64> {
    let mut edc = vec![0.0; ir.len()];
    let mut acc = 0.0;
    for i in (0..ir.len()).rev() {
        acc += ir[i] * ir[i];
        edc[i] = acc;
    }
    if acc <= 0.0 {
        return None;
    }
    let (mut sx, mut sy, mut sxx, mut sxy, mut count) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut reached = false;
    for (i, &e) in edc.iter().enumerate() {
        let db = 10.0 * (e / acc).log10();
        if db < -25.0 {
            reached = true;
            break;
        }
        if db <= -5.0 {
            let t = i as f64 / sample_rate as f64;
            sx += t;
            sy += db;
            sxx += t * t;
            sxy += t * db;
            count += 1.0;
        }
    }
    if !reached || count < 2.0 {
        return None;
    }
    let slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    (slope < 0.0).then(|| -60.0 / slope)
}
