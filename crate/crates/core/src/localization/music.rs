//! MUSIC search over HRTF steering vectors (2-D) or lateral steering
//! vectors (1-D).

use crate::error::{Error, Result};
use crate::hrtf::{Direction, HrtfSet, LateralSteeringField};
use crate::linalg::{inner_abs2, normalized, C64};

/// Index minimising `|q^H v|^2`, i.e. maximising the MUSIC spectrum
/// `1 / |q^H v|^2`. The first index wins ties.
pub fn music_argmax(q_n: [C64; 2], steering: &[[C64; 2]]) -> Option<usize> {
    let mut best = None;
    let mut best_v = f64::INFINITY;
    for (i, v) in steering.iter().enumerate() {
        let p = inner_abs2(q_n, *v);
        if p < best_v {
            best_v = p;
            best = Some(i);
        }
    }
    best
}

fn check_noise_vector(q_n: [C64; 2]) -> Result<()> {
    let n = q_n[0].norm_sqr() + q_n[1].norm_sqr();
    if !n.is_finite() || (n - 1.0).abs() > 1e-6 {
        return Err(Error::Degenerate(format!(
            "noise-subspace vector has squared norm {n}"
        )));
    }
    Ok(())
}

/// 2-D MUSIC over every direction of `set` at `frequency`, with each
/// steering vector normalised to unit length.
pub fn music_2d(q_n: [C64; 2], set: &HrtfSet, frequency: f64) -> Result<Direction> {
    check_noise_vector(q_n)?;
    let steering: Vec<[C64; 2]> = (0..set.len())
        .map(|d| normalized(set.response(d, frequency)))
        .collect();
    let best = music_argmax(q_n, &steering).ok_or_else(|| Error::invalid("empty HRTF set"))?;
    Ok(set.directions()[best])
}

/// Frequency index of `frequency` in `grid`, matched to within 1e-6 Hz.
pub fn grid_index(grid: &[f64], frequency: f64) -> Result<usize> {
    grid.iter()
        .position(|f| (f - frequency).abs() <= 1e-6)
        .ok_or_else(|| Error::GridMismatch(format!("{frequency} Hz is not on the steering grid")))
}

/// 1-D MUSIC over the lateral grid; returns degrees.
pub fn music_1d(q_n: [C64; 2], field: &LateralSteeringField, frequency: f64) -> Result<f64> {
    check_noise_vector(q_n)?;
    let fi = grid_index(&field.frequency_grid, frequency)?;
    let steering: Vec<[C64; 2]> = field.u1.iter().map(|row| row[fi]).collect();
    let best = music_argmax(q_n, &steering).ok_or_else(|| Error::invalid("empty lateral grid"))?;
    Ok(field.lateral_grid[best])
}
