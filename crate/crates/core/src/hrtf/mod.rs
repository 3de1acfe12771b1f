//! HRTF sets, interaural coordinates, lateral steering vectors and
//! focusing matrices.

mod coords;
mod focusing;
mod grid;
mod index;
mod io;
mod lateral;
mod set;
mod sphere;

pub use coords::{
    interaural_to_sph, sin_cos_deg, sph_to_interaural, Direction, InterauralDirection,
    SAME_DIRECTION_DEG,
};
pub use focusing::{build_focusing, FocusingOperator};
pub use grid::{default_search_grid, interaural_grid, lateral_grid, quasi_uniform_grid};
pub use index::DirectionIndex;
pub use io::{
    decode_hrtf, encode_hrtf, hrtf_digest, import_wav_dir, load_hrtf, parse_direction_name,
    save_hrtf,
};
pub use lateral::{
    build_lateral_field, build_lateral_field_from, cone_members, effective_rank, median,
    steering_from_columns, LateralSteeringField,
};
pub use set::{HrtfResponses, HrtfSet};
pub use sphere::{
    sphere_hrtf, sphere_pressure, woodworth_itd, DEFAULT_HEAD_RADIUS, SPEED_OF_SOUND,
};
