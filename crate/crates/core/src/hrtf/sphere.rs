//! Far-field rigid-sphere head model with ears at the ends of the
//! interaural axis.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::FftPlanner;

use super::coords::Direction;
use super::set::HrtfSet;
use crate::error::{Error, Result};
use crate::linalg::C64;

pub const SPEED_OF_SOUND: f64 = 343.0;

/// Default head radius in metres.
pub const DEFAULT_HEAD_RADIUS: f64 = 0.0875;

/// Pressure on a rigid sphere of radius `a`, relative to the free-field
/// pressure at its centre, for a plane wave arriving from angle `Θ` off the
/// ear axis (`cos_incidence = cos Θ`). `ka = 2 pi f a / c`.
///
/// Returned in the DSP sign convention (`exp(-j w t)` delays), so a source
/// nearer the ear gives a phase lead.
pub fn sphere_pressure(ka: f64, cos_incidence: f64) -> C64 {
    if ka <= 0.0 {
        return C64::new(1.0, 0.0);
    }
    let x = ka;
    let i = C64::new(0.0, 1.0);
    let eix = C64::from_polar(1.0, x);
    // Outgoing spherical Hankel functions h_m = j_m + i y_m (physics
    // convention, time factor exp(-i w t)).
    let mut h_prev = -i * eix / x;
    let mut h = -eix * C64::new(x, 1.0) / (x * x);
    let mut p_prev = 1.0;
    let mut p = cos_incidence;

    // m = 0: h_0' = -h_1
    let mut sum = i / (x * x * (-h));
    let mut phase = C64::new(1.0, 0.0);
    let max_m = (x + 40.0 + 4.0 * x.cbrt()) as usize;
    for m in 1..=max_m {
        let mf = m as f64;
        // h_m' = h_{m-1} - (m+1)/x h_m
        let dh = h_prev - h * ((mf + 1.0) / x);
        phase *= -i;
        let term = phase * (2.0 * mf + 1.0) * p * i / (x * x * dh);
        sum += term;
        if mf > x && term.norm() < 1e-16 * sum.norm() {
            break;
        }
        let h_next = h * ((2.0 * mf + 1.0) / x) - h_prev;
        h_prev = h;
        h = h_next;
        let p_next = ((2.0 * mf + 1.0) * cos_incidence * p - mf * p_prev) / (mf + 1.0);
        p_prev = p;
        p = p_next;
    }
    sum.conj()
}

/// Impulse-response design used by [`sphere_hrtf`], in samples at 48 kHz;
/// everything scales with the sample rate.
const DESIGN_FFT_48K: usize = 256;
const DESIGN_DELAY_48K: usize = 40;
const DESIGN_LEN_48K: usize = 160;
const DESIGN_FADE_48K: usize = 16;

/// Rigid-sphere HRIRs for the given directions.
///
/// The response is sampled on an FFT grid, delayed by a fixed bulk delay so
/// the diffraction precursor stays causal, tapered above one third of the
/// sample rate and truncated. Samples are rounded to `f32` so the set
/// survives the container format unchanged.
pub fn sphere_hrtf(radius: f64, directions: &[Direction], sample_rate: u32) -> Result<HrtfSet> {
    if !(radius > 0.05 && radius < 0.15) {
        return Err(Error::invalid(format!(
            "head radius {radius} m outside (0.05, 0.15)"
        )));
    }
    if directions.is_empty() {
        return Err(Error::invalid("no directions requested"));
    }
    if sample_rate < 8000 {
        return Err(Error::invalid("sample rate below 8 kHz"));
    }
    let scale = sample_rate as f64 / 48000.0;
    let n_fft = (((DESIGN_FFT_48K as f64 * scale) / 2.0).ceil() as usize * 2).max(64);
    let delay = (DESIGN_DELAY_48K as f64 * scale).round() as usize;
    let len = ((DESIGN_LEN_48K as f64 * scale).round() as usize).min(n_fft);
    let fade = ((DESIGN_FADE_48K as f64 * scale).round() as usize).max(1);
    let fs = sample_rate as f64;
    let taper_lo = fs / 3.0;
    let taper_hi = fs / 2.0;

    let ifft = FftPlanner::new().plan_fft_inverse(n_fft);
    let design = |cos_incidence: f64| -> Vec<f64> {
        let mut spec = vec![C64::new(0.0, 0.0); n_fft];
        for k in 0..=n_fft / 2 {
            let f = k as f64 * fs / n_fft as f64;
            let ka = 2.0 * PI * f * radius / SPEED_OF_SOUND;
            let taper = if f <= taper_lo {
                1.0
            } else {
                0.5 + 0.5 * (PI * (f - taper_lo) / (taper_hi - taper_lo)).cos()
            };
            let shift =
                C64::from_polar(1.0, -2.0 * PI * ((k * delay) % n_fft) as f64 / n_fft as f64);
            let mut v = sphere_pressure(ka, cos_incidence) * shift * taper;
            if k == n_fft / 2 {
                v = C64::new(v.re, 0.0);
            }
            spec[k] = v;
            if k > 0 && k < n_fft / 2 {
                spec[n_fft - k] = v.conj();
            }
        }
        ifft.process(&mut spec);
        (0..len)
            .map(|n| {
                let mut v = spec[n].re / n_fft as f64;
                if n + fade >= len {
                    let t = (len - n) as f64 / (fade + 1) as f64;
                    v *= 0.5 - 0.5 * (PI * t).cos();
                }
                v as f32 as f64
            })
            .collect()
    };

    let (left, right): (Vec<Vec<f64>>, Vec<Vec<f64>>) = directions
        .par_iter()
        .map(|d| {
            let cy = d.unit_vector()[1];
            (design(cy), design(-cy))
        })
        .unzip();
    HrtfSet::new(sample_rate, directions.to_vec(), left, right)
}

/// Woodworth's ray-tracing ITD for a source at `lateral_offset` radians from
/// the median plane.
pub fn woodworth_itd(radius: f64, lateral_offset: f64) -> f64 {
    radius / SPEED_OF_SOUND * (lateral_offset + lateral_offset.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pressure_limits() {
        assert_eq!(sphere_pressure(0.0, 0.3), C64::new(1.0, 0.0));
        let p = sphere_pressure(1e-4, 0.7);
        assert!((p - C64::new(1.0, 0.0)).norm() < 1e-3);
        // Bright spot side gains about 6 dB at high ka.
        let near = sphere_pressure(20.0, 1.0).norm();
        assert!(near > 1.6 && near < 2.4, "{near}");
        // Shadow side is attenuated.
        assert!(sphere_pressure(10.0, -0.9).norm() < 0.7);
    }

    #[test]
    fn low_frequency_phase_delay_follows_three_a_over_c() {
        // Long-wavelength limit: ITD -> 3 a/c sin(theta).
        let a = DEFAULT_HEAD_RADIUS;
        let f = 100.0;
        let ka = 2.0 * PI * f * a / SPEED_OF_SOUND;
        let l = sphere_pressure(ka, 1.0);
        let r = sphere_pressure(ka, -1.0);
        let itd = -(l * r.conj()).arg() / (2.0 * PI * f);
        let kuhn = -3.0 * a / SPEED_OF_SOUND;
        assert!((itd - kuhn).abs() < 0.03 * kuhn.abs(), "{itd} vs {kuhn}");
    }

    #[test]
    fn radius_is_validated() {
        let d = [Direction::new(0.0, 0.0)];
        assert!(sphere_hrtf(0.2, &d, 48000).is_err());
        assert!(sphere_hrtf(0.05, &d, 48000).is_err());
        assert!(sphere_hrtf(0.0875, &[], 48000).is_err());
    }

    #[test]
    fn median_plane_is_symmetric_and_mirrors_swap() {
        let dirs = [
            Direction::new(0.0, 0.0),
            Direction::new(180.0, 30.0),
            Direction::new(60.0, 10.0),
            Direction::new(300.0, 10.0),
        ];
        let set = sphere_hrtf(DEFAULT_HEAD_RADIUS, &dirs, 48000).unwrap();
        assert_eq!(set.ir_length(), 160);
        for i in 0..2 {
            for (l, r) in set.left(i).iter().zip(set.right(i)) {
                assert!((l - r).abs() < 1e-10);
            }
        }
        for (a, b) in set.left(2).iter().zip(set.right(3)) {
            assert!((a - b).abs() < 1e-7);
        }
        for (a, b) in set.right(2).iter().zip(set.left(3)) {
            assert!((a - b).abs() < 1e-7);
        }
    }
}
