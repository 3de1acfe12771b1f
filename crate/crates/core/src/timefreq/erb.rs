//! ERB-scale gammatone bank with one-sided (analytic) impulse responses.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Glasberg & Moore equivalent rectangular bandwidth in Hz.
#[inline]
pub fn erb_hz(f: f64) -> f64 {
    24.7 * (4.37 * f / 1000.0 + 1.0)
}

/// ERB-rate (number of ERBs below `f`).
#[inline]
pub fn erb_rate(f: f64) -> f64 {
    21.4 * (4.37 * f / 1000.0 + 1.0).log10()
}

#[inline]
pub fn erb_rate_to_hz(e: f64) -> f64 {
    (10f64.powf(e / 21.4) - 1.0) * 1000.0 / 4.37
}

/// Gammatone bandwidth correction for a 4th-order filter.
pub const GAMMATONE_BANDWIDTH_FACTOR: f64 = 1.019;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErbBankParams {
    pub f_lo: f64,
    pub f_hi: f64,
    pub n_channels: usize,
    pub sample_rate: u32,
    pub order: u32,
    /// Envelope level (relative to its peak) at which the impulse response is truncated.
    pub truncation_floor: f64,
    /// Hard cap on filter length, in samples at 48 kHz (scaled with the sample rate).
    pub max_taps_at_48k: usize,
    /// The cap may cut the envelope only below this level; otherwise the bank is rejected.
    pub max_cut_level: f64,
}

impl ErbBankParams {
    pub fn new(f_lo: f64, f_hi: f64, n_channels: usize, sample_rate: u32) -> Self {
        ErbBankParams {
            f_lo,
            f_hi,
            n_channels,
            sample_rate,
            order: 4,
            truncation_floor: 1e-5,
            max_taps_at_48k: 4096,
            max_cut_level: 1e-3,
        }
    }

    /// 42 channels between 60 Hz and 6 kHz.
    pub fn speech(sample_rate: u32) -> Self {
        Self::new(60.0, 6000.0, 42, sample_rate)
    }

    pub fn max_taps(&self) -> usize {
        ((self.max_taps_at_48k as f64) * self.sample_rate as f64 / 48000.0).round() as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErbChannel {
    /// Centre frequency in Hz.
    pub center: f64,
    /// ERB(center), the band used for the decimation interval.
    pub erb: f64,
    /// Gammatone bandwidth parameter `b` in Hz.
    pub bandwidth: f64,
    /// Decimation factor applied to the channel output.
    pub decimation: usize,
    /// Anti-causal taps: `taps[k]` multiplies `x[tau + k]`.
    pub taps: Vec<C64>,
}

impl ErbChannel {
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Output sampling interval in seconds.
    pub fn time_step(&self, sample_rate: u32) -> f64 {
        self.decimation as f64 / sample_rate as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErbBank {
    pub params: ErbBankParams,
    pub channels: Vec<ErbChannel>,
}

/// `t^(n-1) exp(-2 pi b t)`
#[inline]
fn envelope(t: f64, order: u32, b: f64) -> f64 {
    t.powi(order as i32 - 1) * (-2.0 * PI * b * t).exp()
}

impl ErbBank {
    pub fn new(params: ErbBankParams) -> Result<Self> {
        let fs = params.sample_rate as f64;
        if params.sample_rate == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if !(params.f_lo > 0.0 && params.f_lo < params.f_hi && params.f_hi < fs / 2.0) {
            return Err(Error::invalid(format!(
                "need 0 < f_lo < f_hi < fs/2, got {} / {} / {}",
                params.f_lo,
                params.f_hi,
                fs / 2.0
            )));
        }
        if params.n_channels < 2 {
            return Err(Error::invalid("an ERB bank needs at least two channels"));
        }
        if params.order < 1 {
            return Err(Error::invalid("filter order must be at least 1"));
        }

        let e_lo = erb_rate(params.f_lo);
        let e_hi = erb_rate(params.f_hi);
        let n = params.n_channels;
        let cap = params.max_taps();
        let mut channels = Vec::with_capacity(n);
        for i in 0..n {
            let center = if i == 0 {
                params.f_lo
            } else if i == n - 1 {
                params.f_hi
            } else {
                erb_rate_to_hz(e_lo + (e_hi - e_lo) * i as f64 / (n - 1) as f64)
            };
            channels.push(make_channel(center, &params, cap)?);
        }
        Ok(ErbBank { params, channels })
    }

    pub fn sample_rate(&self) -> u32 {
        self.params.sample_rate
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn max_len(&self) -> usize {
        self.channels.iter().map(|c| c.len()).max().unwrap_or(0)
    }

    pub fn centers(&self) -> Vec<f64> {
        self.channels.iter().map(|c| c.center).collect()
    }

    /// Bank restricted to the given channel indices (kept in order).
    pub fn subset(&self, indices: &[usize]) -> ErbBank {
        ErbBank {
            params: self.params.clone(),
            channels: indices.iter().map(|&i| self.channels[i].clone()).collect(),
        }
    }
}

fn make_channel(center: f64, params: &ErbBankParams, cap: usize) -> Result<ErbChannel> {
    let fs = params.sample_rate as f64;
    let erb = erb_hz(center);
    let b = GAMMATONE_BANDWIDTH_FACTOR * erb;
    let order = params.order;

    let t_peak = (order as f64 - 1.0) / (2.0 * PI * b);
    let peak = if order == 1 {
        1.0
    } else {
        envelope(t_peak, order, b)
    };
    let k_peak = (t_peak * fs).ceil() as usize;

    let mut len = k_peak + 1;
    while envelope(len as f64 / fs, order, b) >= params.truncation_floor * peak {
        len += 1;
        if len > 16 * cap.max(1) {
            break;
        }
    }
    if len > cap {
        let cut = envelope(cap as f64 / fs, order, b) / peak;
        if cut > params.max_cut_level {
            return Err(Error::FilterTooLong {
                frequency: center,
                needed: len,
                cap,
            });
        }
        len = cap;
    }

    let env: Vec<f64> = (0..len)
        .map(|k| envelope(k as f64 / fs, order, b))
        .collect();
    // |G| peaks at the centre frequency where it equals the envelope sum.
    let gain = 1.0 / env.iter().sum::<f64>();
    let w = 2.0 * PI * center / fs;
    let taps = env
        .iter()
        .enumerate()
        .map(|(k, &e)| C64::from_polar(e * gain, -w * k as f64))
        .collect();

    let decimation = ((1.0 / (2.0 * erb)) * fs).floor().max(1.0) as usize;

    Ok(ErbChannel {
        center,
        erb,
        bandwidth: b,
        decimation,
        taps,
    })
}
