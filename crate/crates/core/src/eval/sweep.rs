//! Scenario sweeps over every (method, front-end, search) combination.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::record::{write_records_csv, write_timings_csv, RunRecord};
use super::summary::{plot_data, summarize, ConditionSummary, Factor};
use crate::audio::read_wav;
use crate::error::{Error, Result};
use crate::hrtf::HrtfSet;
use crate::localization::{analyze, search, LocalizationConfig, Method, Prepared, SearchMode};
use crate::roomsim::{
    image_method_brir, load_external_brir, random_scenario, render_brir, speech_like, split_seed,
    synthesize, ImageOptions, ImageStats, RoomScenario, ScenarioOptions,
};
use crate::timefreq::{BinauralSignal, FrontendKind};

/// A measured BRIR rendered with one of the sweep's speech sources.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalCase {
    /// Stereo WAV with a JSON sidecar of the same stem.
    pub brir: PathBuf,
    #[serde(default)]
    pub snr: Option<f64>,
    #[serde(default)]
    pub speech: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub seed: u64,
    /// Number of simulated scenarios.
    pub scenarios: usize,
    pub options: ScenarioOptions,
    /// Mono WAV speech sources at the HRTF sample rate. When empty,
    /// `synthetic_speech` speech-like signals are generated instead.
    pub speech: Vec<PathBuf>,
    pub synthetic_speech: usize,
    /// Seconds per synthetic source.
    pub speech_seconds: f64,
    pub external: Vec<ExternalCase>,
    pub methods: Vec<Method>,
    pub frontends: Vec<FrontendKind>,
    pub searches: Vec<SearchMode>,
    /// Front-end kind, method and search mode are overridden per run. Not
    /// read from sweep files; the caller supplies it.
    #[serde(skip)]
    pub localization: LocalizationConfig,
    pub image: ImageOptions,
    /// Width of the lateral-angle bins in the summaries, degrees.
    pub lateral_bin: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            seed: 0,
            scenarios: 60,
            options: ScenarioOptions::default(),
            speech: Vec::new(),
            synthetic_speech: 4,
            speech_seconds: 3.0,
            external: Vec::new(),
            methods: vec![Method::Dpd, Method::Je],
            frontends: vec![FrontendKind::Stft, FrontendKind::Afb],
            searches: vec![SearchMode::OneD, SearchMode::TwoD],
            localization: LocalizationConfig::default(),
            image: ImageOptions::default(),
            lateral_bin: 20.0,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() || self.frontends.is_empty() || self.searches.is_empty() {
            return Err(Error::invalid(
                "methods, frontends and searches must be non-empty",
            ));
        }
        if self.speech.is_empty() && (self.synthetic_speech == 0 || !(self.speech_seconds > 0.0)) {
            return Err(Error::invalid(
                "no speech: list WAV files or enable synthetic speech",
            ));
        }
        if !(self.lateral_bin > 0.0) {
            return Err(Error::invalid("lateral_bin must be positive"));
        }
        self.localization.validate()
    }

    /// Localisation config of one front-end, with default method and search.
    pub fn frontend_config(&self, kind: FrontendKind) -> LocalizationConfig {
        let mut c = self.localization.clone();
        c.frontend.kind = kind;
        c
    }

    fn run_config(
        &self,
        kind: FrontendKind,
        method: Method,
        mode: SearchMode,
    ) -> LocalizationConfig {
        let mut c = self.frontend_config(kind);
        c.search.method = method;
        c.search.mode = mode;
        c
    }

    pub fn n_speech(&self) -> usize {
        if self.speech.is_empty() {
            self.synthetic_speech
        } else {
            self.speech.len()
        }
    }

    pub fn n_scenarios(&self) -> usize {
        self.scenarios + self.external.len()
    }
}

/// One cell of the run matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedRun {
    pub scenario: usize,
    pub method: Method,
    pub frontend: FrontendKind,
    pub search: SearchMode,
}

/// Every (scenario, method, front-end, search) run in execution order.
/// External cases follow the simulated scenarios.
pub fn plan(config: &SweepConfig) -> Vec<PlannedRun> {
    let mut out = Vec::new();
    for scenario in 0..config.n_scenarios() {
        for &frontend in &config.frontends {
            for &method in &config.methods {
                for &search in &config.searches {
                    out.push(PlannedRun {
                        scenario,
                        method,
                        frontend,
                        search,
                    });
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbortedScenario {
    pub scenario: usize,
    pub reason: String,
}

/// Simulator settings actually used for a scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDiagnostics {
    pub scenario: RoomScenario,
    pub image: ImageStats,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub records: Vec<RunRecord>,
    pub aborted: Vec<AbortedScenario>,
    pub diagnostics: Vec<ScenarioDiagnostics>,
}

/// The sweep's speech sources: the listed WAV files or the synthetic
/// stand-ins.
pub fn speech_sources(config: &SweepConfig, sample_rate: u32) -> Result<Vec<Vec<f64>>> {
    if config.speech.is_empty() {
        return Ok((0..config.synthetic_speech)
            .map(|i| {
                let seed = split_seed(config.seed, (1 << 32) + i as u64);
                speech_like(config.speech_seconds, sample_rate, seed)
            })
            .collect());
    }
    config
        .speech
        .iter()
        .map(|path| {
            let (mut channels, fs) = read_wav(path)?;
            if channels.len() != 1 {
                return Err(Error::malformed(path, "speech must be mono"));
            }
            if fs != sample_rate {
                return Err(Error::SampleRateMismatch(sample_rate, fs));
            }
            Ok(channels.pop().expect("one channel"))
        })
        .collect()
}

struct Rendered {
    signal: BinauralSignal,
    truth: f64,
    snr: Option<f64>,
    t60: Option<f64>,
    distance_factor: Option<f64>,
    diagnostics: Option<ScenarioDiagnostics>,
}

fn render(id: usize, config: &SweepConfig, set: &HrtfSet, speech: &[Vec<f64>]) -> Result<Rendered> {
    let fs = set.sample_rate();
    if id < config.scenarios {
        let scenario = random_scenario(
            id,
            &config.options,
            set.directions(),
            speech.len(),
            config.seed,
        )?;
        let (brir, stats) = image_method_brir(&scenario, set, &config.image)?;
        let synth = synthesize(&scenario, &brir, &speech[scenario.speech], fs)?;
        return Ok(Rendered {
            signal: synth.signal,
            truth: synth.truth_lateral,
            snr: scenario.snr,
            t60: Some(scenario.t60),
            distance_factor: Some(scenario.distance_factor),
            diagnostics: Some(ScenarioDiagnostics {
                scenario,
                image: stats,
            }),
        });
    }
    let case = &config.external[id - config.scenarios];
    let (brir, _) = load_external_brir(&case.brir)?;
    let source = speech.get(case.speech).ok_or_else(|| {
        Error::invalid(format!(
            "external case {}: no speech source {}",
            id, case.speech
        ))
    })?;
    let seed = split_seed(config.seed, id as u64);
    let synth = render_brir(&brir, source, brir.sample_rate, case.snr, seed)?;
    Ok(Rendered {
        signal: synth.signal,
        truth: synth.truth_lateral,
        snr: case.snr,
        t60: None,
        distance_factor: None,
        diagnostics: None,
    })
}

fn run_scenario(
    id: usize,
    config: &SweepConfig,
    set: &HrtfSet,
    prepared: &[&Prepared],
    speech: &[Vec<f64>],
) -> Result<(Vec<RunRecord>, Option<ScenarioDiagnostics>)> {
    let rendered = render(id, config, set, speech)?;
    let mut records = Vec::new();
    for (&kind, artifacts) in config.frontends.iter().zip(prepared) {
        let analysis = analyze(&rendered.signal, artifacts, &config.frontend_config(kind))?;
        for &method in &config.methods {
            for &mode in &config.searches {
                let report = search(&analysis, artifacts, &config.run_config(kind, method, mode))?;
                records.push(RunRecord {
                    scenario: id,
                    method,
                    frontend: kind,
                    search: mode,
                    snr: rendered.snr,
                    t60: rendered.t60,
                    distance_factor: rendered.distance_factor,
                    truth: rendered.truth,
                    estimate: report.estimate,
                    pass_count: report.pass_count,
                    total_bins: report.total_bins,
                    timings: report.timings,
                });
            }
        }
    }
    Ok((records, rendered.diagnostics))
}

/// Run the whole matrix. `prepared` must hold artifacts for every
/// configured front-end at the HRTF sample rate. A scenario that fails is
/// recorded in [`SweepOutcome::aborted`] and the sweep goes on.
pub fn run_sweep(
    config: &SweepConfig,
    set: &HrtfSet,
    prepared: &[Prepared],
) -> Result<SweepOutcome> {
    config.validate()?;
    let fs = set.sample_rate();
    let artifacts: Vec<&Prepared> = config
        .frontends
        .iter()
        .map(|&kind| {
            let wanted = config.frontend_config(kind);
            prepared
                .iter()
                .find(|p| p.matches(&wanted, fs))
                .ok_or_else(|| {
                    Error::invalid(format!(
                        "no prepared artifacts for the {kind} front-end at {fs} Hz"
                    ))
                })
        })
        .collect::<Result<_>>()?;
    let speech = speech_sources(config, fs)?;

    let results: Vec<_> = (0..config.n_scenarios())
        .into_par_iter()
        .map(|id| (id, run_scenario(id, config, set, &artifacts, &speech)))
        .collect();
    let mut outcome = SweepOutcome::default();
    for (id, result) in results {
        match result {
            Ok((records, diagnostics)) => {
                outcome.records.extend(records);
                outcome.diagnostics.extend(diagnostics);
            }
            Err(e) => {
                log::warn!("scenario {id} aborted: {e}");
                outcome.aborted.push(AbortedScenario {
                    scenario: id,
                    reason: e.to_string(),
                });
            }
        }
    }
    Ok(outcome)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub runs: usize,
    pub warnings: usize,
    pub aborted: Vec<AbortedScenario>,
    pub conditions: Vec<ConditionSummary>,
    pub diagnostics: Vec<ScenarioDiagnostics>,
}

pub fn sweep_summary(outcome: &SweepOutcome, lateral_bin: f64) -> SweepSummary {
    SweepSummary {
        runs: outcome.records.len(),
        warnings: outcome.aborted.len(),
        aborted: outcome.aborted.clone(),
        conditions: summarize(&outcome.records, lateral_bin),
        diagnostics: outcome.diagnostics.clone(),
    }
}

/// Write `records.csv`, `summary.json` and `rmse_vs_{snr,t60,lateral}.dat`
/// into `dir`, plus `timings.csv` when `with_timings` is set. Returns the
/// paths written.
pub fn write_sweep_outputs(
    dir: &Path,
    outcome: &SweepOutcome,
    summary: &SweepSummary,
    with_timings: bool,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut put = |name: &str, bytes: Vec<u8>| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    let mut csv = Vec::new();
    write_records_csv(&mut csv, &outcome.records)?;
    put("records.csv", csv)?;
    put("summary.json", serde_json::to_vec_pretty(summary)?)?;
    for factor in [Factor::Snr, Factor::T60, Factor::Lateral] {
        let name = format!("rmse_vs_{}.dat", factor.as_str());
        put(&name, plot_data(&summary.conditions, factor).into_bytes())?;
    }
    if with_timings {
        let mut t = Vec::new();
        write_timings_csv(&mut t, &outcome.records)?;
        put("timings.csv", t)?;
    }
    Ok(written)
}
