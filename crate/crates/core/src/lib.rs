//! Binaural direction-of-arrival estimation with a direct-path dominance
//! test, MUSIC search over HRTF steering vectors and an auditory filter
//! bank front-end.

pub mod audio;
pub mod cache;
mod error;
pub mod eval;
pub mod hrtf;
pub mod je;
pub mod linalg;
pub mod localization;
pub mod roomsim;
pub mod timefreq;

pub use error::{Error, Result};
