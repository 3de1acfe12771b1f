//! Direct-path dominance localisation: focusing, smoothing, DPD bin
//! selection and MUSIC over 2-D directions or 1-D lateral angles.

mod config;
mod music;
mod pipeline;
mod prepare;
mod spectrum;

pub use config::{
    DpdMode, FrontendConfig, JeParams, LocalizationConfig, Method, SearchConfig, SearchMode,
    SmoothingParams,
};
pub use music::{grid_index, music_1d, music_2d, music_argmax};
pub use pipeline::{
    analyze, analyze_needed, localize, music_lateral, search, smoothed_field, Analysis,
    BinEstimate, LocalizationReport, StageTimings,
};
pub use prepare::{artifact_key, prepare, target_channels, Prepared, PreparedTarget};
pub use spectrum::{
    apply_focusing, dpd_select, spatial_spectrum, SpatialBin, SpatialSpectrumField,
};
