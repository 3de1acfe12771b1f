//! Joint ITD/ILD cue-matching baseline evaluated on DPD-selected bins.
//!
//! ITD is positive when the right ear lags, i.e. for sources on the left.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hrtf::{cone_members, median, HrtfSet};
use crate::linalg::C64;
use crate::localization::{grid_index, JeParams, SmoothingParams, SpatialBin};
use crate::timefreq::TfRepresentation;

/// Reference cues per (frequency, row). Each row is labelled with its
/// lateral angle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CueTable {
    pub frequencies: Vec<f64>,
    /// Lateral angle of each row in degrees.
    pub lateral: Vec<f64>,
    /// `itd[f][row]` in seconds.
    pub itd: Vec<Vec<f64>>,
    /// `ild[f][row]` in dB.
    pub ild: Vec<Vec<f64>>,
}

fn wrap_pi(x: f64) -> f64 {
    x - 2.0 * PI * ((x + PI) / (2.0 * PI)).floor()
}

/// Interaural phase `arg(H_l conj(H_r))` unwrapped along frequency from DC
/// on a dense FFT grid.
fn dense_unwrapped_phase(
    left: &[f64],
    right: &[f64],
    n_fft: usize,
    planner: &mut FftPlanner<f64>,
) -> Vec<f64> {
    let fft = planner.plan_fft_forward(n_fft);
    let spectrum = |x: &[f64]| {
        let mut buf: Vec<C64> = x.iter().map(|&v| C64::new(v, 0.0)).collect();
        buf.resize(n_fft, C64::new(0.0, 0.0));
        fft.process(&mut buf);
        buf
    };
    let (l, r) = (spectrum(left), spectrum(right));
    let mut out = Vec::with_capacity(n_fft / 2 + 1);
    let mut prev = 0.0;
    for k in 0..=n_fft / 2 {
        let p = (l[k] * r[k].conj()).arg();
        let u = if k == 0 { p } else { prev + wrap_pi(p - prev) };
        out.push(u);
        prev = u;
    }
    out
}

/// Reference cues for every direction of `set` at each of `frequencies`
/// (all positive).
pub fn build_cue_table(set: &HrtfSet, frequencies: &[f64]) -> Result<CueTable> {
    if frequencies
        .iter()
        .any(|&f| !(f > 0.0) || f >= set.sample_rate() as f64 / 2.0)
    {
        return Err(Error::invalid("cue frequencies must lie in (0, fs/2)"));
    }
    let fs = set.sample_rate() as f64;
    let n_fft = (2 * set.ir_length()).next_power_of_two().max(2048);
    let bin_hz = fs / n_fft as f64;
    let responses = set.responses(frequencies);

    let per_dir: Vec<Result<(Vec<f64>, Vec<f64>)>> = (0..set.len())
        .into_par_iter()
        .map_init(FftPlanner::new, |planner, d| {
            let dense = dense_unwrapped_phase(set.left(d), set.right(d), n_fft, planner);
            let mut itd = Vec::with_capacity(frequencies.len());
            let mut ild = Vec::with_capacity(frequencies.len());
            for (fi, &f) in frequencies.iter().enumerate() {
                let [hl, hr] = responses.get(fi, d);
                if hl.norm() == 0.0 || hr.norm() == 0.0 {
                    return Err(Error::Degenerate(format!(
                        "zero-magnitude HRTF at {f} Hz for direction {:?}",
                        set.directions()[d]
                    )));
                }
                let pos = f / bin_hz;
                let k = pos.floor() as usize;
                let frac = pos - k as f64;
                let guide = dense[k] + frac * (dense[(k + 1).min(dense.len() - 1)] - dense[k]);
                let exact = (hl * hr.conj()).arg();
                let phase = exact + 2.0 * PI * ((guide - exact) / (2.0 * PI)).round();
                itd.push(phase / (2.0 * PI * f));
                ild.push(20.0 * (hl.norm() / hr.norm()).log10());
            }
            Ok((itd, ild))
        })
        .collect();

    let mut table = CueTable {
        frequencies: frequencies.to_vec(),
        lateral: set
            .directions()
            .iter()
            .map(|d| d.to_interaural().lateral)
            .collect(),
        itd: vec![Vec::with_capacity(set.len()); frequencies.len()],
        ild: vec![Vec::with_capacity(set.len()); frequencies.len()],
    };
    for row in per_dir {
        let (itd, ild) = row?;
        for fi in 0..frequencies.len() {
            table.itd[fi].push(itd[fi]);
            table.ild[fi].push(ild[fi]);
        }
    }
    Ok(table)
}

/// Lateral-only table: per cone, the median ITD and ILD of the table rows
/// that resample the cone.
pub fn marginalize_cones(
    table: &CueTable,
    set: &HrtfSet,
    lateral_grid: &[f64],
    n_intraconic: usize,
) -> Result<CueTable> {
    if table.lateral.len() != set.len() {
        return Err(Error::GridMismatch(
            "cue table rows do not match the HRTF set".into(),
        ));
    }
    let cones: Vec<Vec<usize>> = lateral_grid
        .iter()
        .map(|&lat| cone_members(set.directions(), lat, n_intraconic))
        .collect();
    let pick = |values: &[f64], members: &[usize]| {
        let v: Vec<f64> = members.iter().map(|&m| values[m]).collect();
        median(&v).unwrap_or(0.0)
    };
    Ok(CueTable {
        frequencies: table.frequencies.clone(),
        lateral: lateral_grid.to_vec(),
        itd: table
            .itd
            .iter()
            .map(|row| cones.iter().map(|c| pick(row, c)).collect())
            .collect(),
        ild: table
            .ild
            .iter()
            .map(|row| cones.iter().map(|c| pick(row, c)).collect())
            .collect(),
    })
}

/// ITD and ILD of channel `channel` at `frame`, from the cross-product and
/// powers averaged over the trailing `j_tau` frames.
pub fn extract_cues(
    left: &TfRepresentation,
    right: &TfRepresentation,
    channel: usize,
    frame: usize,
    j_tau: usize,
) -> Result<(f64, f64)> {
    if !left.same_grid(right) {
        return Err(Error::GridMismatch("left and right grids differ".into()));
    }
    if channel >= left.n_channels()
        || frame >= left.frames(channel)
        || j_tau == 0
        || frame + 1 < j_tau
    {
        return Err(Error::invalid("bin outside the time-frequency grid"));
    }
    let f = left.frequencies[channel];
    if !(f > 0.0) {
        return Err(Error::invalid("cues need a positive channel frequency"));
    }
    let mut cross = C64::new(0.0, 0.0);
    let (mut pl, mut pr) = (0.0, 0.0);
    for m in frame + 1 - j_tau..=frame {
        let (a, b) = (left.channels[channel][m], right.channels[channel][m]);
        cross += a * b.conj();
        pl += a.norm_sqr();
        pr += b.norm_sqr();
    }
    if pl == 0.0 || pr == 0.0 {
        return Err(Error::Degenerate(format!(
            "zero power at channel {channel}, frame {frame}"
        )));
    }
    Ok((cross.arg() / (2.0 * PI * f), 10.0 * (pl / pr).log10()))
}

/// Row minimising `(dITD / s_itd)^2 + (dILD / s_ild)^2` at table frequency
/// `fi`, with the ITD difference taken as a wrapped phase difference. The
/// first row wins ties.
pub fn match_cues(table: &CueTable, fi: usize, itd: f64, ild: f64, params: &JeParams) -> usize {
    let f = table.frequencies[fi];
    let w = 2.0 * PI * f;
    let (use_itd, use_ild) = (params.uses_itd(f), params.uses_ild(f));
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for row in 0..table.lateral.len() {
        let mut d = 0.0;
        if use_itd {
            let dt = wrap_pi(w * (itd - table.itd[fi][row])) / w;
            d += (dt / params.s_itd).powi(2);
        }
        if use_ild {
            d += ((ild - table.ild[fi][row]) / params.s_ild).powi(2);
        }
        if d < best_d {
            best_d = d;
            best = row;
        }
    }
    best
}

/// Per-bin JE lateral estimates for `bins`, whose `channel` fields index
/// `left`/`right`. Bins with zero power in either ear are skipped.
pub fn je_estimates(
    left: &TfRepresentation,
    right: &TfRepresentation,
    bins: &[SpatialBin],
    table: &CueTable,
    params: &JeParams,
    smoothing: &SmoothingParams,
) -> Result<Vec<Option<f64>>> {
    bins.par_iter()
        .map(|b| {
            let fi = grid_index(&table.frequencies, b.frequency)?;
            let j_tau = smoothing.j_tau(left.time_steps[b.channel]);
            match extract_cues(left, right, b.channel, b.frame, j_tau) {
                Ok((itd, ild)) => Ok(Some(table.lateral[match_cues(table, fi, itd, ild, params)])),
                Err(Error::Degenerate(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect()
}
