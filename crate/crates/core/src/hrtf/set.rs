use std::f64::consts::PI;

use rayon::prelude::*;

use super::coords::{Direction, SAME_DIRECTION_DEG};
use crate::error::{Error, Result};
use crate::linalg::C64;

/// Left/right head-related impulse responses on a set of directions.
#[derive(Clone, Debug, PartialEq)]
pub struct HrtfSet {
    sample_rate: u32,
    directions: Vec<Direction>,
    left: Vec<Vec<f64>>,
    right: Vec<Vec<f64>>,
}

/// Transfer functions of every direction on a frequency grid.
/// `values[f][d]` holds `[H_left, H_right]`.
#[derive(Clone, Debug, PartialEq)]
pub struct HrtfResponses {
    pub frequencies: Vec<f64>,
    pub values: Vec<Vec<[C64; 2]>>,
}

impl HrtfResponses {
    #[inline]
    pub fn get(&self, freq_index: usize, direction: usize) -> [C64; 2] {
        self.values[freq_index][direction]
    }

    pub fn n_directions(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }
}

impl HrtfSet {
    /// All impulse responses must share one length.
    pub fn new(
        sample_rate: u32,
        directions: Vec<Direction>,
        left: Vec<Vec<f64>>,
        right: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if directions.is_empty() {
            return Err(Error::invalid("an HRTF set needs at least one direction"));
        }
        if left.len() != directions.len() || right.len() != directions.len() {
            return Err(Error::invalid(
                "one left and one right response per direction",
            ));
        }
        let n = left[0].len();
        if n == 0 {
            return Err(Error::invalid("empty impulse responses"));
        }
        for ir in left.iter().chain(&right) {
            if ir.len() != n {
                let (s, l) = (ir.len().min(n), ir.len().max(n));
                return Err(Error::MismatchedLengths {
                    shortest: s,
                    longest: l,
                });
            }
            if ir.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("non-finite impulse response sample"));
            }
        }
        let directions: Vec<Direction> = directions
            .into_iter()
            .map(|d| Direction::new(d.azimuth, d.elevation))
            .collect();
        check_duplicates(&directions)?;
        Ok(HrtfSet {
            sample_rate,
            directions,
            left,
            right,
        })
    }

    /// Zero-pads every response to the longest one. Rejects sets whose
    /// shortest response is under half the longest.
    pub fn from_padded(
        sample_rate: u32,
        directions: Vec<Direction>,
        mut left: Vec<Vec<f64>>,
        mut right: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let lens = left.iter().chain(&right).map(Vec::len);
        let longest = lens.clone().max().unwrap_or(0);
        let shortest = lens.min().unwrap_or(0);
        if shortest * 2 < longest {
            return Err(Error::MismatchedLengths { shortest, longest });
        }
        for ir in left.iter_mut().chain(right.iter_mut()) {
            ir.resize(longest, 0.0);
        }
        Self::new(sample_rate, directions, left, right)
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn ir_length(&self) -> usize {
        self.left[0].len()
    }

    pub fn left(&self, index: usize) -> &[f64] {
        &self.left[index]
    }

    pub fn right(&self, index: usize) -> &[f64] {
        &self.right[index]
    }

    /// Index of the closest direction; the first one wins ties.
    pub fn nearest(&self, target: &Direction) -> usize {
        nearest_direction(&self.directions, target)
    }

    /// True when the directions span 3-D space (not all on one plane
    /// through the origin).
    pub fn spans_space(&self) -> bool {
        let v: Vec<[f64; 3]> = self.directions.iter().map(|d| d.unit_vector()).collect();
        for i in 0..v.len() {
            for j in (i + 1)..v.len() {
                let n = cross(v[i], v[j]);
                if dot(n, n) < 1e-12 {
                    continue;
                }
                if v.iter().any(|w| dot(n, *w).abs() > 1e-6) {
                    return true;
                }
                return false;
            }
        }
        false
    }

    /// `[H_left(f), H_right(f)]` with `H(f) = sum_n h[n] exp(-j 2 pi f n / fs)`.
    pub fn response(&self, index: usize, frequency: f64) -> [C64; 2] {
        let phasors = phasor_table(frequency, self.sample_rate, self.ir_length());
        [
            dtft(&self.left[index], &phasors),
            dtft(&self.right[index], &phasors),
        ]
    }

    pub fn responses(&self, frequencies: &[f64]) -> HrtfResponses {
        let values = frequencies
            .par_iter()
            .map(|&f| {
                let phasors = phasor_table(f, self.sample_rate, self.ir_length());
                self.left
                    .iter()
                    .zip(&self.right)
                    .map(|(l, r)| [dtft(l, &phasors), dtft(r, &phasors)])
                    .collect()
            })
            .collect();
        HrtfResponses {
            frequencies: frequencies.to_vec(),
            values,
        }
    }
}

fn phasor_table(frequency: f64, sample_rate: u32, len: usize) -> Vec<C64> {
    let w = 2.0 * PI * frequency / sample_rate as f64;
    (0..len)
        .map(|n| C64::from_polar(1.0, -w * n as f64))
        .collect()
}

fn dtft(ir: &[f64], phasors: &[C64]) -> C64 {
    ir.iter().zip(phasors).map(|(&h, p)| p * h).sum()
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn nearest_direction(directions: &[Direction], target: &Direction) -> usize {
    let t = target.unit_vector();
    let mut best = 0;
    let mut best_dot = f64::NEG_INFINITY;
    for (i, d) in directions.iter().enumerate() {
        let c = dot(t, d.unit_vector());
        if c > best_dot {
            best_dot = c;
            best = i;
        }
    }
    best
}

fn check_duplicates(directions: &[Direction]) -> Result<()> {
    let tol = SAME_DIRECTION_DEG.to_radians();
    // Sort by z so only a narrow band needs pairwise checks.
    let mut order: Vec<(f64, [f64; 3], usize)> = directions
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let v = d.unit_vector();
            (v[2], v, i)
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    for i in 0..order.len() {
        for j in (i + 1)..order.len() {
            if order[j].0 - order[i].0 > tol {
                break;
            }
            let (a, b) = (order[i].1, order[j].1);
            let dist =
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
            if dist < tol {
                let d = directions[order[i].2.max(order[j].2)];
                return Err(Error::DuplicateDirection {
                    azimuth: d.azimuth,
                    elevation: d.elevation,
                });
            }
        }
    }
    Ok(())
}
