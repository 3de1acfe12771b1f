//! Offline artifacts for one (HRTF set, configuration, sample rate):
//! focusing matrices, normalised 2-D steering vectors, the lateral steering
//! field and JE cue tables, all at the frequencies that produce bins.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{FrontendConfig, LocalizationConfig, SearchConfig, SmoothingParams};
use crate::error::{Error, Result};
use crate::hrtf::{
    build_focusing, build_lateral_field_from, encode_hrtf, lateral_grid, Direction,
    FocusingOperator, HrtfSet, LateralSteeringField,
};
use crate::je::{build_cue_table, marginalize_cones, CueTable};
use crate::linalg::{normalized, C64};

/// Per target channel: the focusing operator over `[c - J_w + 1, c]` and
/// the normalised 2-D steering vectors at the target frequency. Band
/// indices refer to positions in [`Prepared::needed`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreparedTarget {
    pub channel: usize,
    pub frequency: f64,
    pub focusing: FocusingOperator,
    pub steering: Vec<[C64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prepared {
    pub key: String,
    pub sample_rate: u32,
    pub frontend: FrontendConfig,
    pub smoothing: SmoothingParams,
    pub search: SearchConfig,
    /// Centre frequency of every front-end channel.
    pub frequencies: Vec<f64>,
    /// Front-end channels that must be analysed, ascending.
    pub needed: Vec<usize>,
    pub targets: Vec<PreparedTarget>,
    /// 2-D search grid (the HRTF set directions).
    pub directions: Vec<Direction>,
    /// Frequency grid equals the target frequencies.
    pub lateral: LateralSteeringField,
    pub cues_2d: CueTable,
    pub cues_1d: CueTable,
}

/// Cache key: hash of the HRTF container bytes and every configuration
/// field that shapes the artifacts.
pub fn artifact_key(set: &HrtfSet, config: &LocalizationConfig, sample_rate: u32) -> String {
    let mut h = Sha256::new();
    h.update(b"prepared-v1");
    h.update(encode_hrtf(set));
    h.update(sample_rate.to_le_bytes());
    let parts = (
        &config.frontend,
        &config.smoothing,
        config.search.lateral_step,
        config.search.intraconic_samples,
    );
    h.update(serde_json::to_vec(&parts).expect("config serialises"));
    hex::encode(h.finalize())
}

/// Channels producing bins: inside the band and with `J_w - 1` lower
/// neighbours.
pub fn target_channels(frequencies: &[f64], smoothing: &SmoothingParams) -> Vec<usize> {
    (smoothing.j_omega.saturating_sub(1)..frequencies.len())
        .filter(|&c| frequencies[c] >= smoothing.band.0 && frequencies[c] <= smoothing.band.1)
        .collect()
}

pub fn prepare(set: &HrtfSet, config: &LocalizationConfig, sample_rate: u32) -> Result<Prepared> {
    config.validate()?;
    if set.sample_rate() != sample_rate {
        return Err(Error::SampleRateMismatch(set.sample_rate(), sample_rate));
    }
    let frontend = config.frontend.build(sample_rate)?;
    let frequencies = frontend.frequencies(sample_rate);
    let smoothing = &config.smoothing;
    let targets = target_channels(&frequencies, smoothing);
    if targets.is_empty() {
        return Err(Error::invalid(
            "no front-end channel falls inside the smoothing band",
        ));
    }
    let jw = smoothing.j_omega;
    let mut needed: Vec<usize> = targets.iter().flat_map(|&c| c + 1 - jw..=c).collect();
    needed.sort_unstable();
    needed.dedup();

    let needed_freqs: Vec<f64> = needed.iter().map(|&c| frequencies[c]).collect();
    let responses = set.responses(&needed_freqs);
    let position = |c: usize| {
        needed
            .binary_search(&c)
            .expect("target neighbours are needed")
    };

    let mut prepared_targets = Vec::with_capacity(targets.len());
    for &c in &targets {
        let band: Vec<usize> = (c + 1 - jw..=c).map(position).collect();
        let reference = position(c);
        let focusing = build_focusing(&responses, &band, reference)?;
        let steering = responses.values[reference]
            .iter()
            .map(|h| normalized(*h))
            .collect();
        prepared_targets.push(PreparedTarget {
            channel: c,
            frequency: frequencies[c],
            focusing,
            steering,
        });
    }

    let target_freqs: Vec<f64> = targets.iter().map(|&c| frequencies[c]).collect();
    let target_responses = crate::hrtf::HrtfResponses {
        frequencies: target_freqs.clone(),
        values: targets
            .iter()
            .map(|&c| responses.values[position(c)].clone())
            .collect(),
    };
    let lat_grid = lateral_grid(config.search.lateral_step);
    let lateral = build_lateral_field_from(
        set.directions(),
        &target_responses,
        &lat_grid,
        config.search.intraconic_samples,
    )?;
    let cues_2d = build_cue_table(set, &target_freqs)?;
    let cues_1d = marginalize_cones(&cues_2d, set, &lat_grid, config.search.intraconic_samples)?;

    Ok(Prepared {
        key: artifact_key(set, config, sample_rate),
        sample_rate,
        frontend: config.frontend.clone(),
        smoothing: smoothing.clone(),
        search: config.search.clone(),
        frequencies,
        needed,
        targets: prepared_targets,
        directions: set.directions().to_vec(),
        lateral,
        cues_2d,
        cues_1d,
    })
}

impl Prepared {
    /// True if these artifacts were built for `config` at `sample_rate`.
    /// Search mode, method, DPD mode and JE scales do not affect them.
    pub fn matches(&self, config: &LocalizationConfig, sample_rate: u32) -> bool {
        self.sample_rate == sample_rate
            && self.frontend == config.frontend
            && self.smoothing == config.smoothing
            && self.search.lateral_step == config.search.lateral_step
            && self.search.intraconic_samples == config.search.intraconic_samples
    }

    /// MUSIC evaluations per bin in the 1-D and 2-D searches.
    pub fn grid_sizes(&self) -> (usize, usize) {
        (self.lateral.lateral_grid.len(), self.directions.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hrtf::{interaural_grid, sphere_hrtf, DEFAULT_HEAD_RADIUS};
    use crate::timefreq::FrontendKind;

    fn small_config(kind: FrontendKind) -> LocalizationConfig {
        let mut cfg = LocalizationConfig::default();
        cfg.frontend.kind = kind;
        cfg.frontend.fft_size = 256;
        cfg.frontend.hop = 128;
        cfg.search.lateral_step = 10.0;
        cfg.search.intraconic_samples = 8;
        cfg
    }

    #[test]
    fn targets_and_neighbours() {
        let set = sphere_hrtf(DEFAULT_HEAD_RADIUS, &interaural_grid(10.0, 8), 16000).unwrap();
        for kind in [FrontendKind::Stft, FrontendKind::Afb] {
            let cfg = small_config(kind);
            let p = prepare(&set, &cfg, 16000).unwrap();
            assert!(!p.targets.is_empty());
            for t in &p.targets {
                assert!(t.frequency >= 1000.0 && t.frequency <= 6000.0);
                assert_eq!(t.focusing.band.len(), 2);
                assert_eq!(p.needed[t.focusing.reference], t.channel);
                assert_eq!(p.needed[t.focusing.band[0]], t.channel - 1);
                assert_eq!(t.steering.len(), set.len());
            }
            assert_eq!(p.lateral.frequency_grid.len(), p.targets.len());
            assert_eq!(p.grid_sizes(), (19, set.len()));
            assert!(p.matches(&cfg, 16000));
            assert!(!p.matches(&cfg, 48000));
        }
    }

    #[test]
    fn key_tracks_inputs() {
        let set = sphere_hrtf(DEFAULT_HEAD_RADIUS, &interaural_grid(30.0, 4), 16000).unwrap();
        let cfg = small_config(FrontendKind::Afb);
        let k = artifact_key(&set, &cfg, 16000);
        assert_eq!(k, artifact_key(&set, &cfg, 16000));
        let mut other = cfg.clone();
        other.smoothing.j_omega = 3;
        assert_ne!(k, artifact_key(&set, &other, 16000));
        let mut search_only = cfg.clone();
        search_only.search.mode = super::super::config::SearchMode::TwoD;
        assert_eq!(k, artifact_key(&set, &search_only, 16000));
    }

    #[test]
    fn sample_rate_mismatch() {
        let set = sphere_hrtf(DEFAULT_HEAD_RADIUS, &interaural_grid(30.0, 4), 16000).unwrap();
        assert!(matches!(
            prepare(&set, &small_config(FrontendKind::Stft), 48000),
            Err(Error::SampleRateMismatch(16000, 48000))
        ));
    }
}
