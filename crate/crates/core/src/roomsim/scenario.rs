//! Room scenarios and seeded random scenario generation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::image::critical_distance;
use crate::error::{Error, Result};
use crate::hrtf::{sin_cos_deg, Direction};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoomScenario {
    pub id: usize,
    /// Metres.
    pub room: [f64; 3],
    /// Seconds.
    pub t60: f64,
    /// Relative to the array (head frame).
    pub source_direction: Direction,
    /// Metres.
    pub source_distance: f64,
    /// Source distance as a multiple of the critical distance.
    pub distance_factor: f64,
    /// Metres.
    pub array_position: [f64; 3],
    /// Rotation of the head frame about the vertical axis, degrees.
    pub array_yaw: f64,
    /// Index into the sweep's speech list.
    pub speech: usize,
    /// dB; `None` disables the noise.
    pub snr: Option<f64>,
    pub seed: u64,
}

fn inside(p: [f64; 3], room: [f64; 3], margin: f64) -> bool {
    (0..3).all(|i| p[i] > margin && p[i] < room[i] - margin)
}

impl RoomScenario {
    pub fn source_position(&self) -> [f64; 3] {
        let u = self.source_direction.unit_vector();
        let (s, c) = sin_cos_deg(self.array_yaw);
        let d = self.source_distance;
        [
            self.array_position[0] + d * (c * u[0] - s * u[1]),
            self.array_position[1] + d * (s * u[0] + c * u[1]),
            self.array_position[2] + d * u[2],
        ]
    }

    pub fn truth_lateral(&self) -> f64 {
        self.source_direction.to_interaural().lateral
    }

    pub fn validate(&self) -> Result<()> {
        if self.room.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::invalid("room dimensions must be positive"));
        }
        if !(self.t60 > 0.0) {
            return Err(Error::invalid("T60 must be positive"));
        }
        if !(self.source_distance > 0.2) {
            return Err(Error::invalid(format!(
                "source distance {} m is not above 0.2 m",
                self.source_distance
            )));
        }
        if !inside(self.array_position, self.room, 0.0) {
            return Err(Error::invalid("array outside the room"));
        }
        if !inside(self.source_position(), self.room, 0.0) {
            return Err(Error::invalid("source outside the room"));
        }
        Ok(())
    }
}

/// Option sets drawn from independently and uniformly per scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioOptions {
    pub rooms: Vec<[f64; 3]>,
    pub distance_factors: Vec<f64>,
    pub snrs: Vec<f64>,
    pub t60s: Vec<f64>,
    /// Wall clearance for the array and the source, metres.
    pub margin: f64,
    pub max_retries: usize,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        ScenarioOptions {
            rooms: vec![[5.0, 10.0, 8.0], [9.0, 7.0, 5.0], [8.0, 5.0, 3.0]],
            distance_factors: vec![0.5, 1.0, 2.0],
            snrs: vec![-5.0, 0.0, 5.0, 10.0, 15.0],
            t60s: vec![0.4, 0.6, 0.8],
            margin: 0.5,
            max_retries: 100,
        }
    }
}

/// Derive an independent seed for stream `index` of `master`.
pub fn split_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.gen()
}

fn check_options(
    options: &ScenarioOptions,
    directions: &[Direction],
    n_speech: usize,
) -> Result<()> {
    if options.rooms.is_empty()
        || options.distance_factors.is_empty()
        || options.snrs.is_empty()
        || options.t60s.is_empty()
        || directions.is_empty()
        || n_speech == 0
    {
        return Err(Error::invalid(
            "every scenario option set must be non-empty",
        ));
    }
    Ok(())
}

/// Scenario `id` of the batch seeded with `seed`; independent of every
/// other id. `directions` is the DOA pool (the search grid) and `n_speech`
/// the number of speech sources to pick from.
pub fn random_scenario(
    id: usize,
    options: &ScenarioOptions,
    directions: &[Direction],
    n_speech: usize,
    seed: u64,
) -> Result<RoomScenario> {
    check_options(options, directions, n_speech)?;
    let scenario_seed = split_seed(seed, id as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(scenario_seed);
    let room = *options.rooms.choose(&mut rng).expect("non-empty");
    let t60 = *options.t60s.choose(&mut rng).expect("non-empty");
    let factor = *options
        .distance_factors
        .choose(&mut rng)
        .expect("non-empty");
    let snr = *options.snrs.choose(&mut rng).expect("non-empty");
    let direction = *directions.choose(&mut rng).expect("non-empty");
    let speech = rng.gen_range(0..n_speech);
    let distance = factor * critical_distance(room, t60);
    let m = options.margin;
    for _ in 0..options.max_retries.max(1) {
        if room.iter().any(|&l| l <= 2.0 * m) {
            break;
        }
        let array_position = [
            rng.gen_range(m..room[0] - m),
            rng.gen_range(m..room[1] - m),
            rng.gen_range(m..room[2] - m),
        ];
        let scenario = RoomScenario {
            id,
            room,
            t60,
            source_direction: direction,
            source_distance: distance,
            distance_factor: factor,
            array_position,
            array_yaw: rng.gen_range(0.0..360.0),
            speech,
            snr: Some(snr),
            seed: scenario_seed,
        };
        if inside(scenario.source_position(), room, m) && scenario.validate().is_ok() {
            return Ok(scenario);
        }
    }
    Err(Error::InfeasiblePlacement(format!(
        "scenario {id}: no placement for a source at {distance:.2} m in a {}x{}x{} m room",
        room[0], room[1], room[2]
    )))
}

/// Scenarios `0..count`; fails on the first infeasible one.
pub fn random_scenarios(
    count: usize,
    options: &ScenarioOptions,
    directions: &[Direction],
    n_speech: usize,
    seed: u64,
) -> Result<Vec<RoomScenario>> {
    check_options(options, directions, n_speech)?;
    (0..count)
        .map(|id| random_scenario(id, options, directions, n_speech, seed))
        .collect()
}
