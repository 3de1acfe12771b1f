//! The pipeline configuration file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use binaural_doa::eval::SweepConfig;
use binaural_doa::hrtf::{interaural_grid, load_hrtf, sphere_hrtf, HrtfSet, DEFAULT_HEAD_RADIUS};
use binaural_doa::localization::LocalizationConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// Rigid-sphere HRTF generator settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SphereSpec {
    /// Metres.
    pub radius: f64,
    pub sample_rate: u32,
    /// Interaural grid: lateral step in degrees and points per cone.
    pub lateral_step: f64,
    pub intraconic: usize,
}

impl Default for SphereSpec {
    fn default() -> Self {
        SphereSpec {
            radius: DEFAULT_HEAD_RADIUS,
            sample_rate: 16000,
            lateral_step: 2.0,
            intraconic: 24,
        }
    }
}

impl SphereSpec {
    pub fn build(&self) -> Result<HrtfSet> {
        let grid = interaural_grid(self.lateral_step, self.intraconic);
        Ok(sphere_hrtf(self.radius, &grid, self.sample_rate)?)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HrtfSection {
    /// HRTF container; the rigid-sphere generator is used when absent.
    pub container: Option<PathBuf>,
    pub sphere: SphereSpec,
}

impl HrtfSection {
    pub fn load(&self) -> Result<HrtfSet> {
        match &self.container {
            Some(path) => Ok(load_hrtf(path)?),
            None => self.sphere.build(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    pub iterations: usize,
    /// Length of the speech fixture in seconds.
    pub seconds: f64,
}

impl Default for BenchSection {
    fn default() -> Self {
        BenchSection {
            iterations: 7,
            seconds: 5.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub hrtf: HrtfSection,
    #[serde(default)]
    pub localization: LocalizationConfig,
    /// Also holds the master seed for `simulate` and `bench`.
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub bench: BenchSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            schema_version: SCHEMA_VERSION,
            hrtf: HrtfSection::default(),
            localization: LocalizationConfig::default(),
            sweep: SweepConfig::default(),
            bench: BenchSection::default(),
        }
    }
}

fn resolve(base: &Path, path: &mut PathBuf) {
    if path.is_relative() {
        *path = base.join(&*path);
    }
}

impl PipelineConfig {
    /// Parse `path`, resolving relative file references against its
    /// directory, and validate.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut config: PipelineConfig = serde_json::from_str(&text)
            .with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(c) = config.hrtf.container.as_mut() {
            resolve(base, c);
        }
        for s in &mut config.sweep.speech {
            resolve(base, s);
        }
        for e in &mut config.sweep.external {
            resolve(base, &mut e.brir);
        }
        config
            .validate()
            .with_context(|| format!("in config {}", path.display()))?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            bail!(
                "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
                self.schema_version
            );
        }
        let mut files: Vec<&Path> = Vec::new();
        files.extend(self.hrtf.container.as_deref());
        files.extend(self.sweep.speech.iter().map(PathBuf::as_path));
        files.extend(self.sweep.external.iter().map(|e| e.brir.as_path()));
        for f in files {
            if !f.exists() {
                bail!("referenced file {} does not exist", f.display());
            }
        }
        if self.bench.iterations < 5 {
            bail!("bench.iterations must be at least 5");
        }
        self.localization.validate()?;
        Ok(())
    }

    /// The sweep section with the top-level localisation settings.
    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            localization: self.localization.clone(),
            ..self.sweep.clone()
        }
    }
}
