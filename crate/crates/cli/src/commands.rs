use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use serde::Serialize;

use binaural_doa::audio::{read_binaural, write_binaural};
use binaural_doa::cache::{cache_dir, entry_path, load_prepared, prepare_cached};
use binaural_doa::eval::{
    bench_search, plan, run_sweep, speech_sources, sweep_summary, write_sweep_outputs,
};
use binaural_doa::hrtf::{hrtf_digest, import_wav_dir, load_hrtf, save_hrtf, HrtfSet};
use binaural_doa::localization::{artifact_key, localize, LocalizationConfig, Prepared};
use binaural_doa::roomsim::{
    image_method_brir, random_scenario, speech_like, split_seed, synthesize, ImageStats,
    RoomScenario,
};
use binaural_doa::timefreq::FrontendKind;

use crate::config::PipelineConfig;
use crate::{Cli, Command, GlobalArgs};

/// Artifacts for the current HRTF set and configuration are not cached.
#[derive(Debug, thiserror::Error)]
#[error(
    "no cached artifacts for the {frontend} front-end in {dir} (key {key}); \
     run `binaural-doa hrtf-prep{config}` first"
)]
pub struct MissingArtifacts {
    frontend: FrontendKind,
    dir: String,
    key: String,
    config: String,
}

/// The localisation ran but no bin passed.
#[derive(Debug, thiserror::Error)]
#[error("no estimate: no bin passed the direct-path dominance test")]
pub struct NoEstimate;

pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<MissingArtifacts>() || cause.is::<std::io::Error>() {
            return 3;
        }
        if let Some(err) = cause.downcast_ref::<binaural_doa::Error>() {
            return match err {
                binaural_doa::Error::Io { .. }
                | binaural_doa::Error::Wav(_)
                | binaural_doa::Error::Checksum { .. }
                | binaural_doa::Error::Malformed { .. } => 3,
                _ => 1,
            };
        }
    }
    1
}

fn load_config(global: &GlobalArgs) -> Result<PipelineConfig> {
    let mut config = match &global.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = global.seed {
        config.sweep.seed = seed;
    }
    if let Some(kind) = global.frontend {
        config.localization.frontend.kind = kind;
        config.sweep.frontends = vec![kind];
    }
    if let Some(mode) = global.search {
        config.localization.search.mode = mode;
        config.sweep.searches = vec![mode];
    }
    if let Some(method) = global.method {
        config.localization.search.method = method;
        config.sweep.methods = vec![method];
    }
    Ok(config)
}

fn emit(out: Option<&Path>, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn config_hint(global: &GlobalArgs) -> String {
    global
        .config
        .as_ref()
        .map(|p| format!(" --config {}", p.display()))
        .unwrap_or_default()
}

fn cached(set: &HrtfSet, config: &LocalizationConfig, global: &GlobalArgs) -> Result<Prepared> {
    let dir = cache_dir();
    let key = artifact_key(set, config, set.sample_rate());
    load_prepared(&dir, &key)?.ok_or_else(|| {
        MissingArtifacts {
            frontend: config.frontend.kind,
            dir: dir.display().to_string(),
            key,
            config: config_hint(global),
        }
        .into()
    })
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("cannot configure the thread pool")?;
    }
    let config = load_config(&cli.global)?;
    match cli.command {
        Command::HrtfPrep { input, sphere } => hrtf_prep(&config, &cli.global, input, sphere),
        Command::Simulate { scenarios } => simulate(&config, &cli.global, scenarios),
        Command::Localize { audio } => localize_file(&config, &cli.global, &audio),
        Command::Sweep { dry_run, timings } => sweep(&config, &cli.global, dry_run, timings),
        Command::Bench => bench(&config, &cli.global),
    }
}

#[derive(Serialize)]
struct ArtifactEntry {
    frontend: FrontendKind,
    key: String,
    path: PathBuf,
    cache_hit: bool,
}

#[derive(Serialize)]
struct PrepSummary {
    container: Option<PathBuf>,
    sha256: String,
    directions: usize,
    sample_rate: u32,
    ir_length: usize,
    artifacts: Vec<ArtifactEntry>,
}

fn hrtf_prep(
    config: &PipelineConfig,
    global: &GlobalArgs,
    input: Option<PathBuf>,
    sphere: bool,
) -> Result<ExitCode> {
    let set = if sphere {
        config.hrtf.sphere.build()?
    } else if let Some(input) = &input {
        if input.is_dir() {
            import_wav_dir(input)?
        } else {
            load_hrtf(input)?
        }
    } else {
        config.hrtf.load()?
    };
    let container = match &global.out {
        Some(path) => {
            save_hrtf(path, &set)?;
            Some(path.clone())
        }
        None => None,
    };
    let sha256 = hrtf_digest(&set);

    let mut kinds = vec![config.localization.frontend.kind];
    for &k in &config.sweep.frontends {
        if !kinds.contains(&k) {
            kinds.push(k);
        }
    }
    let dir = cache_dir();
    let mut artifacts = Vec::new();
    for kind in kinds {
        let mut c = config.localization.clone();
        c.frontend.kind = kind;
        let (prepared, hit) = prepare_cached(&set, &c, set.sample_rate(), &dir)?;
        eprintln!(
            "{kind}: {} ({})",
            entry_path(&dir, &prepared.key).display(),
            if hit { "cache hit" } else { "built" }
        );
        artifacts.push(ArtifactEntry {
            frontend: kind,
            path: entry_path(&dir, &prepared.key),
            key: prepared.key,
            cache_hit: hit,
        });
    }
    emit(
        None,
        &PrepSummary {
            container,
            sha256,
            directions: set.len(),
            sample_rate: set.sample_rate(),
            ir_length: set.ir_length(),
            artifacts,
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SimulatedEntry {
    scenario: RoomScenario,
    truth_lateral: f64,
    image: ImageStats,
    wav: PathBuf,
}

fn simulate(
    config: &PipelineConfig,
    global: &GlobalArgs,
    scenarios: Option<usize>,
) -> Result<ExitCode> {
    let out = global
        .out
        .clone()
        .context("simulate needs --out <directory>")?;
    std::fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;
    let set = config.hrtf.load()?;
    let fs = set.sample_rate();
    let sweep = config.sweep_config();
    let speech = speech_sources(&sweep, fs)?;
    let count = scenarios.unwrap_or(sweep.scenarios);
    let mut entries = Vec::new();
    let mut warnings = 0;
    for id in 0..count {
        let rendered = (|| -> Result<SimulatedEntry> {
            let scenario = random_scenario(
                id,
                &sweep.options,
                set.directions(),
                speech.len(),
                sweep.seed,
            )?;
            let (brir, image) = image_method_brir(&scenario, &set, &sweep.image)?;
            let synth = synthesize(&scenario, &brir, &speech[scenario.speech], fs)?;
            let wav = out.join(format!("scenario_{id:04}.wav"));
            write_binaural(&wav, &synth.signal)?;
            let entry = SimulatedEntry {
                truth_lateral: synth.truth_lateral,
                scenario,
                image,
                wav,
            };
            let meta = out.join(format!("scenario_{id:04}.json"));
            std::fs::write(&meta, serde_json::to_string_pretty(&entry)?)
                .with_context(|| format!("cannot write {}", meta.display()))?;
            Ok(entry)
        })();
        match rendered {
            Ok(e) => {
                eprintln!(
                    "scenario {id}: lateral {:.1} deg, T60 {} s, {} images",
                    e.truth_lateral, e.scenario.t60, e.image.images
                );
                entries.push(e);
            }
            Err(e) => {
                warnings += 1;
                eprintln!("warning: scenario {id} skipped: {e:#}");
            }
        }
    }
    if warnings > 0 {
        eprintln!("{warnings} warning(s)");
    }
    emit(None, &entries)?;
    Ok(ExitCode::SUCCESS)
}

fn localize_file(config: &PipelineConfig, global: &GlobalArgs, audio: &Path) -> Result<ExitCode> {
    let set = config.hrtf.load()?;
    let signal = read_binaural(audio)?;
    anyhow::ensure!(
        signal.sample_rate() == set.sample_rate(),
        "{} is at {} Hz but the HRTF set is at {} Hz",
        audio.display(),
        signal.sample_rate(),
        set.sample_rate()
    );
    let prepared = cached(&set, &config.localization, global)?;
    let report = localize(&signal, &prepared, &config.localization)?;
    emit(global.out.as_deref(), &report)?;
    match report.estimate {
        Some(est) => {
            eprintln!(
                "lateral {est:.1} deg from {} of {} bins ({} {} {})",
                report.pass_count, report.total_bins, report.method, report.frontend, report.search
            );
            Ok(ExitCode::SUCCESS)
        }
        None => {
            eprintln!("{NoEstimate}");
            Ok(ExitCode::from(2))
        }
    }
}

#[derive(Serialize)]
struct SweepReport {
    runs: usize,
    warnings: usize,
    files: Vec<PathBuf>,
}

fn sweep(
    config: &PipelineConfig,
    global: &GlobalArgs,
    dry_run: bool,
    timings: bool,
) -> Result<ExitCode> {
    let sweep = config.sweep_config();
    sweep.validate()?;
    if dry_run {
        let runs = plan(&sweep);
        eprintln!(
            "{} runs over {} scenarios (dry run)",
            runs.len(),
            sweep.n_scenarios()
        );
        emit(None, &runs)?;
        return Ok(ExitCode::SUCCESS);
    }
    let set = config.hrtf.load()?;
    let prepared: Vec<Prepared> = sweep
        .frontends
        .iter()
        .map(|&k| cached(&set, &sweep.frontend_config(k), global))
        .collect::<Result<_>>()?;
    let outcome = run_sweep(&sweep, &set, &prepared)?;
    let summary = sweep_summary(&outcome, sweep.lateral_bin);
    let out = global
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("sweep-out"));
    let files = write_sweep_outputs(&out, &outcome, &summary, timings)?;
    for a in &outcome.aborted {
        eprintln!("warning: scenario {} aborted: {}", a.scenario, a.reason);
    }
    eprintln!(
        "{} runs, {} warning(s), outputs in {}",
        summary.runs,
        summary.warnings,
        out.display()
    );
    emit(
        None,
        &SweepReport {
            runs: summary.runs,
            warnings: summary.warnings,
            files,
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

fn bench(config: &PipelineConfig, global: &GlobalArgs) -> Result<ExitCode> {
    let set = config.hrtf.load()?;
    let fs = set.sample_rate();
    let prepared = cached(&set, &config.localization, global)?;
    let sweep = config.sweep_config();
    let scenario = random_scenario(0, &sweep.options, set.directions(), 1, sweep.seed)?;
    let (brir, _) = image_method_brir(&scenario, &set, &sweep.image)?;
    let speech = speech_like(config.bench.seconds, fs, split_seed(sweep.seed, 1 << 33));
    let signal = synthesize(&scenario, &brir, &speech, fs)?.signal;
    let result = bench_search(
        &signal,
        &prepared,
        &config.localization,
        config.bench.iterations,
    )?;
    eprintln!(
        "2-D {:.1} ms, 1-D {:.1} ms (x{:.2}); search stage x{:.2}",
        result.t_2d, result.t_1d, result.ratio, result.search_ratio
    );
    emit(global.out.as_deref(), &result)?;
    Ok(ExitCode::SUCCESS)
}
