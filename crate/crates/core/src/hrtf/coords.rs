//! Spherical and interaural (lateral / intraconic) direction conventions.
//!
//! Head frame: `x` front, `y` left ear, `z` up. Azimuth runs counter-clockwise
//! from the front towards the left ear.

use serde::{Deserialize, Serialize};

/// Angular tolerance (degrees) under which two directions are the same.
pub const SAME_DIRECTION_DEG: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    /// Degrees in `[0, 360)`.
    #[serde(rename = "az")]
    pub azimuth: f64,
    /// Degrees in `[-90, 90]`.
    #[serde(rename = "el")]
    pub elevation: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterauralDirection {
    /// Degrees in `[0, 180]`: 0 left ear, 90 median plane, 180 right ear.
    pub lateral: f64,
    /// Degrees in `[0, 360)`: 0 front, 90 above, 180 back. Zero at the poles.
    pub intraconic: f64,
}

/// `(sin, cos)` of an angle in degrees, exact at multiples of 90.
pub fn sin_cos_deg(deg: f64) -> (f64, f64) {
    let r = deg.rem_euclid(360.0);
    if r == 0.0 {
        (0.0, 1.0)
    } else if r == 90.0 {
        (1.0, 0.0)
    } else if r == 180.0 {
        (0.0, -1.0)
    } else if r == 270.0 {
        (-1.0, 0.0)
    } else {
        r.to_radians().sin_cos()
    }
}

fn wrap360(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

impl Direction {
    /// Wraps the azimuth into `[0, 360)`. At the zenith and nadir the
    /// azimuth is set to 0.
    pub fn new(azimuth: f64, elevation: f64) -> Self {
        let elevation = elevation.clamp(-90.0, 90.0);
        let azimuth = if elevation.abs() == 90.0 {
            0.0
        } else {
            wrap360(azimuth)
        };
        Direction { azimuth, elevation }
    }

    pub fn is_valid(&self) -> bool {
        (0.0..360.0).contains(&self.azimuth) && (-90.0..=90.0).contains(&self.elevation)
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (sa, ca) = sin_cos_deg(self.azimuth);
        let (se, ce) = sin_cos_deg(self.elevation);
        [ce * ca, ce * sa, se]
    }

    pub fn from_vector(v: [f64; 3]) -> Self {
        let horiz = v[0].hypot(v[1]);
        let elevation = v[2].atan2(horiz).to_degrees();
        let azimuth = if horiz <= 1e-15 * v[2].abs() {
            0.0
        } else {
            wrap360(v[1].atan2(v[0]).to_degrees())
        };
        Direction {
            azimuth,
            elevation: elevation.clamp(-90.0, 90.0),
        }
    }

    /// Great-circle angle in degrees.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        let a = self.unit_vector();
        let b = other.unit_vector();
        let cross = [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ];
        let sin = (cross[0].powi(2) + cross[1].powi(2) + cross[2].powi(2)).sqrt();
        let cos = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        sin.atan2(cos).to_degrees()
    }

    /// Mirror image across the median plane.
    pub fn mirrored(&self) -> Direction {
        Direction::new(360.0 - self.azimuth, self.elevation)
    }

    pub fn to_interaural(&self) -> InterauralDirection {
        sph_to_interaural(*self)
    }
}

impl InterauralDirection {
    pub fn new(lateral: f64, intraconic: f64) -> Self {
        let lateral = lateral.clamp(0.0, 180.0);
        let intraconic = if lateral == 0.0 || lateral == 180.0 {
            0.0
        } else {
            wrap360(intraconic)
        };
        InterauralDirection {
            lateral,
            intraconic,
        }
    }

    pub fn to_spherical(&self) -> Direction {
        interaural_to_sph(*self)
    }
}

pub fn sph_to_interaural(d: Direction) -> InterauralDirection {
    let v = d.unit_vector();
    let off_axis = v[0].hypot(v[2]);
    let lateral = off_axis.atan2(v[1]).to_degrees();
    let intraconic = if off_axis <= 1e-15 {
        0.0
    } else {
        wrap360(v[2].atan2(v[0]).to_degrees())
    };
    InterauralDirection {
        lateral: lateral.clamp(0.0, 180.0),
        intraconic,
    }
}

pub fn interaural_to_sph(d: InterauralDirection) -> Direction {
    let (sl, cl) = sin_cos_deg(d.lateral);
    let (si, ci) = sin_cos_deg(d.intraconic);
    Direction::from_vector([sl * ci, cl, sl * si])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_points() {
        let f = sph_to_interaural(Direction::new(0.0, 0.0));
        assert_eq!((f.lateral, f.intraconic), (90.0, 0.0));
        let l = sph_to_interaural(Direction::new(90.0, 0.0));
        assert_eq!((l.lateral, l.intraconic), (0.0, 0.0));
        let z = sph_to_interaural(Direction::new(0.0, 90.0));
        assert_eq!((z.lateral, z.intraconic), (90.0, 90.0));
        let r = sph_to_interaural(Direction::new(270.0, 0.0));
        assert_eq!((r.lateral, r.intraconic), (180.0, 0.0));
        let back = sph_to_interaural(Direction::new(180.0, 0.0));
        assert_eq!((back.lateral, back.intraconic), (90.0, 180.0));

        assert_eq!(
            interaural_to_sph(InterauralDirection::new(90.0, 0.0)),
            Direction::new(0.0, 0.0)
        );
        assert_eq!(
            interaural_to_sph(InterauralDirection::new(0.0, 0.0)),
            Direction::new(90.0, 0.0)
        );
    }

    #[test]
    fn direction_wraps_and_canonicalises() {
        let d = Direction::new(-90.0, 10.0);
        assert_eq!(d.azimuth, 270.0);
        assert_eq!(Direction::new(123.0, 90.0).azimuth, 0.0);
        assert!(
            (Direction::new(30.0, 0.0).angle_to(&Direction::new(60.0, 0.0)) - 30.0).abs() < 1e-12
        );
        assert_eq!(
            Direction::new(30.0, 5.0).mirrored(),
            Direction::new(330.0, 5.0)
        );
    }

    proptest! {
        #[test]
        fn roundtrip(az in 0.0f64..360.0, el in -89.9f64..89.9) {
            let d = Direction::new(az, el);
            let back = interaural_to_sph(sph_to_interaural(d));
            prop_assert!(d.angle_to(&back) < 1e-9);
        }

        #[test]
        fn cone_members_share_the_axis_projection(lat in 0.5f64..179.5, a in 0.0f64..360.0, b in 0.0f64..360.0) {
            let p = interaural_to_sph(InterauralDirection::new(lat, a)).unit_vector();
            let q = interaural_to_sph(InterauralDirection::new(lat, b)).unit_vector();
            prop_assert!((p[1] - q[1]).abs() < 1e-12);
        }

        #[test]
        fn mirror_reflects_lateral(az in 0.0f64..360.0, el in -89.0f64..89.0) {
            let d = Direction::new(az, el);
            let a = sph_to_interaural(d).lateral;
            let b = sph_to_interaural(d.mirrored()).lateral;
            prop_assert!((a + b - 180.0).abs() < 1e-9);
        }
    }
}
