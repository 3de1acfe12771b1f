//! End-to-end localisation: front-end, focusing, smoothing, DPD test,
//! per-bin search and mean aggregation.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{LocalizationConfig, Method, SearchMode};
use super::music::music_argmax;
use super::prepare::Prepared;
use super::spectrum::{
    apply_focusing, dpd_select, spatial_spectrum, SpatialBin, SpatialSpectrumField,
};
use crate::error::{Error, Result};
use crate::je::je_estimates;
use crate::linalg::C64;
use crate::timefreq::{binaural_analyze, BinauralSignal, Frontend, FrontendKind, TfRepresentation};

/// One bin of the pass set with its estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinEstimate {
    /// Front-end channel index.
    pub channel: usize,
    pub frame: usize,
    pub frequency: f64,
    pub time: f64,
    pub ratio: f64,
    /// Lateral degrees; absent when the bin yields no cue (JE on a silent
    /// ear).
    pub lateral: Option<f64>,
}

/// Wall-clock milliseconds per stage.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub frontend: f64,
    pub focusing: f64,
    pub smoothing: f64,
    pub dpd: f64,
    pub search: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub frontend: FrontendKind,
    pub search: SearchMode,
    pub method: Method,
    /// Mean lateral angle in degrees, `None` when no bin passed.
    pub estimate: Option<f64>,
    pub pass_count: usize,
    pub total_bins: usize,
    pub bins: Vec<BinEstimate>,
    pub timings: StageTimings,
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Analysed channels of both ears, indexed like [`Prepared::needed`].
pub fn analyze_needed(
    signal: &BinauralSignal,
    prepared: &Prepared,
) -> Result<(TfRepresentation, TfRepresentation)> {
    let frontend = prepared.frontend.build(signal.sample_rate())?;
    match frontend {
        Frontend::Afb(_) => binaural_analyze(signal, &frontend.restricted(&prepared.needed)),
        Frontend::Stft(_) => {
            let (l, r) = binaural_analyze(signal, &frontend)?;
            Ok((l.select(&prepared.needed), r.select(&prepared.needed)))
        }
    }
}

/// Focused, smoothed bins of every target. Bin channels index the
/// analysed representation; bins are ordered by (channel, frame).
pub fn smoothed_field(
    left: &TfRepresentation,
    right: &TfRepresentation,
    prepared: &Prepared,
    timings: &mut StageTimings,
) -> Result<SpatialSpectrumField> {
    let t = Instant::now();
    let focused: Vec<(TfRepresentation, TfRepresentation)> = prepared
        .targets
        .par_iter()
        .map(|target| apply_focusing(left, right, &target.focusing))
        .collect::<Result<_>>()?;
    timings.focusing = elapsed_ms(t);

    let t = Instant::now();
    let fields: Vec<SpatialSpectrumField> = focused
        .par_iter()
        .zip(&prepared.targets)
        .map(|((fl, fr), target)| {
            let mut field = spatial_spectrum(fl, fr, &prepared.smoothing)?;
            for b in &mut field.bins {
                b.channel = target.focusing.reference;
            }
            Ok(field)
        })
        .collect::<Result<_>>()?;
    let mut merged = SpatialSpectrumField::default();
    for f in fields {
        merged.extend(f);
    }
    timings.smoothing = elapsed_ms(t);
    Ok(merged)
}

/// Index into `prepared.targets` for each analysed channel.
fn target_lookup(prepared: &Prepared) -> Vec<Option<usize>> {
    let mut map = vec![None; prepared.needed.len()];
    for (i, t) in prepared.targets.iter().enumerate() {
        map[t.focusing.reference] = Some(i);
    }
    map
}

/// Search steering vectors per target: lateral-field columns gathered once
/// for 1-D, the stored 2-D vectors otherwise.
fn search_steering(prepared: &Prepared, mode: SearchMode) -> Vec<std::borrow::Cow<'_, [[C64; 2]]>> {
    (0..prepared.targets.len())
        .map(|t| match mode {
            SearchMode::OneD => {
                std::borrow::Cow::Owned(prepared.lateral.u1.iter().map(|row| row[t]).collect())
            }
            SearchMode::TwoD => std::borrow::Cow::Borrowed(prepared.targets[t].steering.as_slice()),
        })
        .collect()
}

/// MUSIC lateral estimate of one smoothed bin. `target` indexes
/// `prepared.targets` (and the lateral field's frequency grid).
pub fn music_lateral(
    bin: &SpatialBin,
    prepared: &Prepared,
    target: usize,
    mode: SearchMode,
) -> f64 {
    match mode {
        SearchMode::OneD => {
            let steering: Vec<_> = prepared.lateral.u1.iter().map(|row| row[target]).collect();
            let best = music_argmax(bin.q_n, &steering).unwrap_or(0);
            prepared.lateral.lateral_grid[best]
        }
        SearchMode::TwoD => {
            let best = music_argmax(bin.q_n, &prepared.targets[target].steering).unwrap_or(0);
            prepared.directions[best].to_interaural().lateral
        }
    }
}

/// Front-end output and DPD-tested field of one signal, shared by every
/// (method, search) combination.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub left: TfRepresentation,
    pub right: TfRepresentation,
    pub field: SpatialSpectrumField,
    pub timings: StageTimings,
}

/// Front-end, focusing, smoothing and the DPD test.
pub fn analyze(
    signal: &BinauralSignal,
    prepared: &Prepared,
    config: &LocalizationConfig,
) -> Result<Analysis> {
    config.validate()?;
    if !prepared.matches(config, signal.sample_rate()) {
        return Err(Error::invalid(
            "prepared artifacts were built for a different configuration or sample rate",
        ));
    }
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let (left, right) = analyze_needed(signal, prepared)?;
    timings.frontend = elapsed_ms(t);

    let mut field = smoothed_field(&left, &right, prepared, &mut timings)?;

    let t = Instant::now();
    field.pass_set = if field.is_empty() {
        Vec::new()
    } else {
        dpd_select(&field, config.dpd)?
    };
    timings.dpd = elapsed_ms(t);
    Ok(Analysis {
        left,
        right,
        field,
        timings,
    })
}

/// Per-bin search over the pass set of `analysis` and mean aggregation.
/// Timings of the shared stages are copied from the analysis.
pub fn search(
    analysis: &Analysis,
    prepared: &Prepared,
    config: &LocalizationConfig,
) -> Result<LocalizationReport> {
    let mut timings = analysis.timings.clone();
    let t = Instant::now();
    let passed: Vec<SpatialBin> = analysis.field.passed().copied().collect();
    let lookup = target_lookup(prepared);
    let laterals: Vec<Option<f64>> = match config.search.method {
        Method::Dpd => {
            let steering = search_steering(prepared, config.search.mode);
            passed
                .par_iter()
                .map(|b| {
                    let target = lookup[b.channel].expect("bins come from targets");
                    let best = music_argmax(b.q_n, &steering[target]).unwrap_or(0);
                    Some(match config.search.mode {
                        SearchMode::OneD => prepared.lateral.lateral_grid[best],
                        SearchMode::TwoD => prepared.directions[best].to_interaural().lateral,
                    })
                })
                .collect()
        }
        Method::Je => {
            let table = match config.search.mode {
                SearchMode::OneD => &prepared.cues_1d,
                SearchMode::TwoD => &prepared.cues_2d,
            };
            je_estimates(
                &analysis.left,
                &analysis.right,
                &passed,
                table,
                &config.je,
                &prepared.smoothing,
            )?
        }
    };
    timings.search = elapsed_ms(t);

    let values: Vec<f64> = laterals.iter().flatten().copied().collect();
    let estimate = if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    };
    let bins = passed
        .iter()
        .zip(&laterals)
        .map(|(b, lat)| BinEstimate {
            channel: prepared.needed[b.channel],
            frame: b.frame,
            frequency: b.frequency,
            time: b.time,
            ratio: b.ratio(),
            lateral: *lat,
        })
        .collect();
    timings.total =
        timings.frontend + timings.focusing + timings.smoothing + timings.dpd + timings.search;

    Ok(LocalizationReport {
        frontend: config.frontend.kind,
        search: config.search.mode,
        method: config.search.method,
        estimate,
        pass_count: analysis.field.pass_set.len(),
        total_bins: analysis.field.len(),
        bins,
        timings,
    })
}

/// Algorithm end to end on one signal.
pub fn localize(
    signal: &BinauralSignal,
    prepared: &Prepared,
    config: &LocalizationConfig,
) -> Result<LocalizationReport> {
    let analysis = analyze(signal, prepared, config)?;
    search(&analysis, prepared, config)
}
