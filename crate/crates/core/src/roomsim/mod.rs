//! Shoebox image-method room simulation, scenario generation and
//! ingestion of measured BRIRs.

mod external;
mod image;
mod scenario;
mod signal;

pub use external::{load_external_brir, save_external_brir, BrirSidecar};
pub use image::{
    critical_distance, eyring_absorption, fractional_delay, image_method_brir, shoebox_absorption,
    AbsorptionModel, Brir, ImageOptions, ImageStats, Provenance,
};
pub use scenario::{random_scenario, random_scenarios, split_seed, RoomScenario, ScenarioOptions};
pub use signal::{
    band_limit, fft_convolve, render_brir, schroeder_t60, speech_like, synthesize, Synthesized,
};
