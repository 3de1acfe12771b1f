//! Shoebox image-source BRIRs spatialised with nearest-direction HRIRs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::scenario::RoomScenario;
use crate::error::{Error, Result};
use crate::hrtf::{Direction, DirectionIndex, HrtfSet, SPEED_OF_SOUND};

/// Half-length of the windowed-sinc fractional delay (32 taps in total).
const SINC_HALF: i64 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Simulated,
    External,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Brir {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub sample_rate: u32,
    /// Ground-truth source direction relative to the array.
    pub direction: Direction,
    pub provenance: Provenance,
}

/// How the wall absorption is derived from the scenario T60.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbsorptionModel {
    /// Eyring's diffuse-field formula.
    Eyring,
    /// Solved so that the image model's own decay has the requested T60.
    #[default]
    ShoeboxFit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImageOptions {
    pub model: AbsorptionModel,
    /// Overrides the absorption derived from T60.
    pub absorption: Option<f64>,
    /// Longest included path in metres; defaults to `d_direct + c T60`.
    pub max_path: Option<f64>,
    pub max_images: usize,
}

impl Default for ImageOptions {
    fn default() -> Self {
        ImageOptions {
            model: AbsorptionModel::default(),
            absorption: None,
            max_path: None,
            max_images: 5_000_000,
        }
    }
}

/// What the simulator did, for run diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageStats {
    pub absorption: f64,
    pub reflection: f64,
    pub max_path: f64,
    pub images: usize,
}

/// Uniform absorption reproducing `t60` by Eyring's formula,
/// `1 - exp(-0.163 V / (S T60))`.
pub fn eyring_absorption(room: [f64; 3], t60: f64) -> Result<f64> {
    if room.iter().any(|&l| !(l > 0.0)) || !(t60 > 0.0) {
        return Err(Error::invalid("room dimensions and T60 must be positive"));
    }
    let v = room[0] * room[1] * room[2];
    let s = 2.0 * (room[0] * room[1] + room[0] * room[2] + room[1] * room[2]);
    Ok(1.0 - (-0.163 * v / (s * t60)).exp())
}

/// Decay time of the direction-averaged image energy for absorption `a`:
/// an image reached along unit direction `u` after time `t` has undergone
/// `c t sum_i |u_i| / L_i` reflections. Fitted like a Schroeder curve.
fn shoebox_decay_time(room: [f64; 3], absorption: f64, directions: &[[f64; 3]]) -> f64 {
    let rates: Vec<f64> = directions
        .iter()
        .map(|u| {
            -(1.0 - absorption).ln()
                * SPEED_OF_SOUND
                * (0..3).map(|i| u[i].abs() / room[i]).sum::<f64>()
        })
        .collect();
    let slowest = rates.iter().cloned().fold(f64::INFINITY, f64::min);
    // The backward integral of exp(-k t) is exp(-k t) / k.
    let edc = |t: f64| rates.iter().map(|k| (-k * t).exp() / k).sum::<f64>();
    let total = edc(0.0);
    // -25 dB is reached no later than 25 ln(10) / 10 / slowest.
    let horizon = 2.5 * 10f64.ln() / slowest;
    let (mut sx, mut sy, mut sxx, mut sxy, mut count) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for step in 0..=400 {
        let t = horizon * step as f64 / 400.0;
        let db = 10.0 * (edc(t) / total).log10();
        if db < -25.0 {
            break;
        }
        if db <= -5.0 {
            sx += t;
            sy += db;
            sxx += t * t;
            sxy += t * db;
            count += 1.0;
        }
    }
    let slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    -60.0 / slope
}

/// Uniform absorption for which the image model of this room decays with
/// `t60`. Unlike Eyring it accounts for the non-diffuse, direction-dependent
/// reflection rate of a shoebox, which otherwise lengthens the decay of
/// rooms with one short dimension.
pub fn shoebox_absorption(room: [f64; 3], t60: f64) -> Result<f64> {
    if room.iter().any(|&l| !(l > 0.0)) || !(t60 > 0.0) {
        return Err(Error::invalid("room dimensions and T60 must be positive"));
    }
    // Fibonacci sphere; the decay is symmetric so one octant would do, but
    // the full sphere keeps the quadrature simple.
    let n = 1000;
    let golden = PI * (1.0 + 5f64.sqrt());
    let directions: Vec<[f64; 3]> = (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * (i as f64 + 0.5);
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect();
    let (mut lo, mut hi) = (1e-9, 1.0 - 1e-9);
    if shoebox_decay_time(room, hi, &directions) > t60 {
        return Ok(1.0);
    }
    if shoebox_decay_time(room, lo, &directions) < t60 {
        return Ok(0.0);
    }
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if shoebox_decay_time(room, mid, &directions) > t60 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `0.057 sqrt(V / T60)` metres.
pub fn critical_distance(room: [f64; 3], t60: f64) -> f64 {
    0.057 * (room[0] * room[1] * room[2] / t60).sqrt()
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else if x == x.round() {
        0.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Hann-windowed sinc taps for a delay of `delay` samples; returns the
/// index of the first tap. An integer delay gives a unit impulse.
pub fn fractional_delay(delay: f64) -> (i64, [f64; 32]) {
    let base = delay.floor() as i64;
    let first = base - SINC_HALF + 1;
    let mut taps = [0.0; 32];
    for (i, t) in taps.iter_mut().enumerate() {
        let x = (first + i as i64) as f64 - delay;
        let w = 0.5 + 0.5 * (PI * x / SINC_HALF as f64).cos();
        *t = if x.abs() < SINC_HALF as f64 {
            sinc(x) * w
        } else {
            0.0
        };
    }
    (first, taps)
}

fn add_image(out: &mut [f64], ir: &[f64], first: i64, taps: &[f64; 32], gain: f64) {
    for (i, &t) in taps.iter().enumerate() {
        if t == 0.0 {
            continue;
        }
        let start = first + i as i64;
        let g = gain * t;
        for (j, &h) in ir.iter().enumerate() {
            let n = start + j as i64;
            if n >= 0 && (n as usize) < out.len() {
                out[n as usize] += g * h;
            }
        }
    }
}

fn rotate_z(v: [f64; 3], deg: f64) -> [f64; 3] {
    let (s, c) = crate::hrtf::sin_cos_deg(deg);
    [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]]
}

/// Image-method BRIR of `scenario` rendered with the HRIRs of `set`.
pub fn image_method_brir(
    scenario: &RoomScenario,
    set: &HrtfSet,
    options: &ImageOptions,
) -> Result<(Brir, ImageStats)> {
    scenario.validate()?;
    let room = scenario.room;
    let absorption = match options.absorption {
        Some(a) if (0.0..=1.0).contains(&a) => a,
        Some(a) => return Err(Error::invalid(format!("absorption {a} outside [0, 1]"))),
        None => match options.model {
            AbsorptionModel::Eyring => eyring_absorption(room, scenario.t60)?,
            AbsorptionModel::ShoeboxFit => shoebox_absorption(room, scenario.t60)?,
        },
    };
    let beta = (1.0 - absorption).sqrt();
    let src = scenario.source_position();
    let rcv = scenario.array_position;
    let d_direct = scenario.source_distance;
    let max_path = options
        .max_path
        .unwrap_or(d_direct + SPEED_OF_SOUND * scenario.t60);
    let fs = set.sample_rate() as f64;

    // Image x = (1 - 2u) s + 2 n L with |n - u| + |n| wall reflections.
    let axis_images = |axis: usize| -> Vec<(f64, i32)> {
        let l = room[axis];
        let reach = (max_path / (2.0 * l)).ceil() as i32 + 1;
        let mut out = Vec::new();
        for n in -reach..=reach {
            for u in 0..2 {
                let pos = (1 - 2 * u) as f64 * src[axis] + 2.0 * n as f64 * l;
                if (pos - rcv[axis]).abs() <= max_path {
                    out.push((pos, (n - u).abs() + n.abs()));
                }
            }
        }
        out
    };
    let (xs, ys, zs) = (axis_images(0), axis_images(1), axis_images(2));

    let index = DirectionIndex::new(set.directions());
    let direct_index = set.nearest(&scenario.source_direction);
    let len = ((max_path / SPEED_OF_SOUND) * fs).ceil() as usize
        + set.ir_length()
        + 2 * SINC_HALF as usize;
    let mut left = vec![0.0; len];
    let mut right = vec![0.0; len];
    let mut images = 0usize;
    let max2 = max_path * max_path;

    for &(x, ox) in &xs {
        let dx = x - rcv[0];
        for &(y, oy) in &ys {
            let dy = y - rcv[1];
            if dx * dx + dy * dy > max2 {
                continue;
            }
            for &(z, oz) in &zs {
                let dz = z - rcv[2];
                let r2 = dx * dx + dy * dy + dz * dz;
                if r2 > max2 {
                    continue;
                }
                let order = ox + oy + oz;
                let gain = if order == 0 { 1.0 } else { beta.powi(order) };
                if gain == 0.0 {
                    continue;
                }
                images += 1;
                if images > options.max_images {
                    return Err(Error::TooManyImages {
                        count: images,
                        cap: options.max_images,
                    });
                }
                // The direct path uses the scenario's exact distance.
                let r = if order == 0 { d_direct } else { r2.sqrt() };
                let dir = if order == 0 {
                    direct_index
                } else {
                    index.nearest_vector(rotate_z([dx, dy, dz], -scenario.array_yaw))
                };
                let (first, taps) = fractional_delay(r / SPEED_OF_SOUND * fs);
                add_image(&mut left, set.left(dir), first, &taps, gain / r);
                add_image(&mut right, set.right(dir), first, &taps, gain / r);
            }
        }
    }

    Ok((
        Brir {
            left,
            right,
            sample_rate: set.sample_rate(),
            direction: scenario.source_direction,
            provenance: Provenance::Simulated,
        },
        ImageStats {
            absorption,
            reflection: beta,
            max_path,
            images,
        },
    ))
}
