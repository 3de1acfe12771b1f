//! Direction grids for the 2-D search and the lateral axis.

use super::coords::{interaural_to_sph, Direction, InterauralDirection};

/// Lateral angles `0, step, ..., 180` in degrees.
pub fn lateral_grid(step: f64) -> Vec<f64> {
    let n = (180.0 / step).round() as usize;
    (0..=n).map(|i| (i as f64 * step).min(180.0)).collect()
}

/// Directions on cones of constant lateral angle: `n_intraconic` equally
/// spaced points per cone, a single point at each pole.
pub fn interaural_grid(lateral_step: f64, n_intraconic: usize) -> Vec<Direction> {
    let mut out = Vec::new();
    for lat in lateral_grid(lateral_step) {
        if lat == 0.0 || lat == 180.0 {
            out.push(interaural_to_sph(InterauralDirection::new(lat, 0.0)));
            continue;
        }
        for j in 0..n_intraconic {
            let ic = j as f64 * 360.0 / n_intraconic as f64;
            out.push(interaural_to_sph(InterauralDirection::new(lat, ic)));
        }
    }
    out
}

/// Default 2-D search grid: 2° lateral steps, 24 points (15°) per cone.
pub fn default_search_grid() -> Vec<Direction> {
    interaural_grid(2.0, 24)
}

/// Rings of constant elevation `step` degrees apart, each with azimuths
/// about `step` degrees apart along the ring.
pub fn quasi_uniform_grid(step: f64) -> Vec<Direction> {
    let rings = (180.0 / step).round() as usize;
    let mut out = Vec::new();
    for r in 0..=rings {
        let el = -90.0 + r as f64 * 180.0 / rings as f64;
        if el.abs() >= 90.0 {
            out.push(Direction::new(0.0, el));
            continue;
        }
        let count = ((360.0 * el.to_radians().cos() / step).round() as usize).max(1);
        for k in 0..count {
            out.push(Direction::new(k as f64 * 360.0 / count as f64, el));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(lateral_grid(2.0).len(), 91);
        assert_eq!(*lateral_grid(2.0).last().unwrap(), 180.0);
        assert_eq!(default_search_grid().len(), 89 * 24 + 2);
        let q = quasi_uniform_grid(4.5);
        assert!(q.len() > 1800 && q.len() < 2300, "{}", q.len());
    }

    #[test]
    fn interaural_grid_lies_on_cones() {
        for d in interaural_grid(10.0, 12) {
            let lat = d.to_interaural().lateral;
            assert!((lat / 10.0 - (lat / 10.0).round()).abs() < 1e-9);
        }
    }
}
