use std::f64::consts::PI;

use rayon::prelude::*;

use super::erb::{ErbBank, ErbChannel};
use super::filtering::{fast_len, filter_decimate, FftPair};
use super::{FrontendKind, TfRepresentation};
use crate::error::{Error, Result};
use crate::linalg::C64;

fn frames_for(len: usize, decimation: usize) -> usize {
    len.div_ceil(decimation)
}

fn check(len: usize, bank: &ErbBank) -> Result<()> {
    if bank.is_empty() {
        return Err(Error::invalid("empty filter bank"));
    }
    if len <= bank.max_len() {
        return Err(Error::SignalTooShort {
            needed: bank.max_len() + 1,
            got: len,
        });
    }
    Ok(())
}

fn baseband(ch: &ErbChannel, sample_rate: u32) -> impl Fn(usize) -> C64 {
    let w = 2.0 * PI * ch.center / sample_rate as f64;
    move |tau| C64::from_polar(1.0, -w * tau as f64)
}

fn empty_tf(bank: &ErbBank) -> TfRepresentation {
    let fs = bank.sample_rate();
    TfRepresentation {
        frontend: FrontendKind::Afb,
        frequencies: bank.centers(),
        time_steps: bank.channels.iter().map(|c| c.time_step(fs)).collect(),
        channels: Vec::with_capacity(bank.len()),
    }
}

/// Gammatone analysis of one signal: zero-padded FFT filtering, baseband
/// shift and per-channel decimation.
pub fn afb_analyze(signal: &[f64], bank: &ErbBank) -> Result<TfRepresentation> {
    Ok(afb_analyze_many(&[signal], bank)?
        .pop()
        .expect("one signal"))
}

/// [`afb_analyze`] over several equal-length signals, sharing each
/// channel's filter spectrum.
pub(crate) fn afb_analyze_many(
    signals: &[&[f64]],
    bank: &ErbBank,
) -> Result<Vec<TfRepresentation>> {
    let len = signals.first().map_or(0, |s| s.len());
    if signals.iter().any(|s| s.len() != len) {
        return Err(Error::invalid("signals must have equal length"));
    }
    check(len, bank)?;
    let fft = FftPair::new(fast_len(len + bank.max_len() - 1));
    let spectra: Vec<Vec<C64>> = signals.iter().map(|s| fft.real_spectrum(s)).collect();
    let fs = bank.sample_rate();

    let per_channel: Vec<Vec<Vec<C64>>> = bank
        .channels
        .par_iter()
        .map(|ch| {
            let frames = frames_for(len, ch.decimation);
            filter_decimate(
                &fft,
                &spectra,
                &ch.taps,
                ch.decimation,
                frames,
                baseband(ch, fs),
            )
        })
        .collect();

    let mut out: Vec<TfRepresentation> = signals.iter().map(|_| empty_tf(bank)).collect();
    for outputs in per_channel {
        for (tf, coeffs) in out.iter_mut().zip(outputs) {
            tf.channels.push(coeffs);
        }
    }
    Ok(out)
}

/// Time-domain evaluation of the same outputs, one sum per retained frame.
/// Slow; kept as a reference for the FFT route.
pub fn afb_analyze_direct(signal: &[f64], bank: &ErbBank) -> Result<TfRepresentation> {
    check(signal.len(), bank)?;
    let fs = bank.sample_rate();
    let mut tf = empty_tf(bank);
    for ch in &bank.channels {
        let shift = baseband(ch, fs);
        let frames = frames_for(signal.len(), ch.decimation);
        let coeffs = (0..frames)
            .map(|m| {
                let tau = m * ch.decimation;
                let y: C64 = ch
                    .taps
                    .iter()
                    .zip(signal.get(tau..).unwrap_or(&[]))
                    .map(|(g, &x)| g * x)
                    .sum();
                y * shift(tau)
            })
            .collect();
        tf.channels.push(coeffs);
    }
    Ok(tf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timefreq::ErbBankParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_bank() -> ErbBank {
        ErbBank::new(ErbBankParams::new(300.0, 3000.0, 5, 16000)).unwrap()
    }

    #[test]
    fn decimation_at_one_khz() {
        let bank = ErbBank::new(ErbBankParams::new(1000.0, 2000.0, 2, 48000)).unwrap();
        assert_eq!(bank.channels[0].decimation, 180);
    }

    #[test]
    fn fft_route_matches_direct() {
        let bank = small_bank();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..4000).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a = afb_analyze(&x, &bank).unwrap();
        let b = afb_analyze_direct(&x, &bank).unwrap();
        assert_eq!(a.frequencies, b.frequencies);
        for (ca, cb) in a.channels.iter().zip(&b.channels) {
            assert_eq!(ca.len(), cb.len());
            for (u, v) in ca.iter().zip(cb) {
                assert!((u - v).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_input_and_errors() {
        let bank = small_bank();
        let tf = afb_analyze(&vec![0.0; 3000], &bank).unwrap();
        assert!(tf.channels.iter().flatten().all(|c| c.norm() == 0.0));
        assert!(matches!(
            afb_analyze(&vec![0.0; bank.max_len()], &bank),
            Err(Error::SignalTooShort { .. })
        ));
        let empty = bank.subset(&[]);
        assert!(afb_analyze(&vec![0.0; 3000], &empty).is_err());
    }

    #[test]
    fn frame_bookkeeping() {
        let bank = ErbBank::new(ErbBankParams::speech(48000)).unwrap();
        let len = 48000;
        let tf = afb_analyze(&vec![0.0; len], &bank).unwrap();
        for (c, ch) in bank.channels.iter().enumerate() {
            let covered = tf.frames(c) * ch.decimation;
            assert!(covered >= len && covered - len < ch.decimation);
        }
        for w in tf.time_steps.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn tone_at_center_is_steady_at_baseband() {
        let bank = small_bank();
        let fs = 16000.0;
        for (c, ch) in bank.channels.iter().enumerate() {
            let w = 2.0 * PI * ch.center / fs;
            let x: Vec<f64> = (0..16000).map(|n| (w * n as f64).cos()).collect();
            let tf = afb_analyze(&x, &bank).unwrap();
            // Skip the tail where the anti-causal filter runs off the signal end.
            let valid = (x.len() - ch.len()) / ch.decimation;
            let out = &tf.channels[c][..valid];
            let mags: Vec<f64> = out.iter().map(|z| z.norm()).collect();
            let mean = mags.iter().sum::<f64>() / mags.len() as f64;
            assert!((mean - 0.5).abs() < 0.01, "channel {c}: {mean}");
            for z in out {
                assert!((z.norm() - mean).abs() < 0.05 * mean);
            }
            for p in out.windows(2) {
                assert!((p[1] * p[0].conj()).arg().abs() < 0.05);
            }
        }
    }
}
