//! Rank-1 lateral steering vectors: the dominant left singular vector of
//! the 2xN matrix of HRTFs around each cone of confusion.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coords::{interaural_to_sph, Direction, InterauralDirection};
use super::set::{nearest_direction, HrtfResponses, HrtfSet};
use crate::error::{Error, Result};
use crate::linalg::{svd_2xn, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LateralSteeringField {
    /// Degrees.
    pub lateral_grid: Vec<f64>,
    /// Hz.
    pub frequency_grid: Vec<f64>,
    /// Set direction indices used for each cone.
    pub cones: Vec<Vec<usize>>,
    /// `u1[lateral][frequency]`, unit norm, first component real and >= 0.
    pub u1: Vec<Vec<[C64; 2]>>,
    pub singular_values: Vec<Vec<[f64; 2]>>,
    pub effective_rank: Vec<Vec<f64>>,
}

/// `exp` of the Shannon entropy of the normalised singular values.
pub fn effective_rank(singular_values: &[f64]) -> Result<f64> {
    if singular_values
        .iter()
        .any(|s| !(*s >= 0.0) || !s.is_finite())
    {
        return Err(Error::invalid(
            "singular values must be finite and non-negative",
        ));
    }
    let total: f64 = singular_values.iter().sum();
    if total == 0.0 {
        return Err(Error::Degenerate("all singular values are zero".into()));
    }
    let entropy: f64 = singular_values
        .iter()
        .map(|s| s / total)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum();
    Ok(entropy.exp())
}

/// Set directions nearest to `n_intraconic` equally spaced points on the
/// cone at `lateral`, in first-seen order without repeats.
pub fn cone_members(directions: &[Direction], lateral: f64, n_intraconic: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(n_intraconic);
    for j in 0..n_intraconic {
        let target = interaural_to_sph(InterauralDirection::new(
            lateral,
            j as f64 * 360.0 / n_intraconic as f64,
        ));
        let idx = nearest_direction(directions, &target);
        if !out.contains(&idx) {
            out.push(idx);
        }
    }
    out
}

/// Dominant singular vector, singular values and effective rank of the
/// matrix whose columns are `columns`.
pub fn steering_from_columns(columns: &[[C64; 2]]) -> ([C64; 2], [f64; 2], f64) {
    let top: Vec<C64> = columns.iter().map(|c| c[0]).collect();
    let bottom: Vec<C64> = columns.iter().map(|c| c[1]).collect();
    let svd = svd_2xn(&top, &bottom);
    let rank = effective_rank(&svd.singular_values).unwrap_or(1.0);
    (svd.u1, svd.singular_values, rank)
}

pub fn build_lateral_field(
    set: &HrtfSet,
    lateral_grid: &[f64],
    n_intraconic: usize,
    frequency_grid: &[f64],
) -> Result<LateralSteeringField> {
    if frequency_grid.is_empty() {
        return Err(Error::invalid("empty frequency grid"));
    }
    let responses = set.responses(frequency_grid);
    build_lateral_field_from(set.directions(), &responses, lateral_grid, n_intraconic)
}

/// Same as [`build_lateral_field`] with the transfer functions already
/// evaluated on the frequency grid.
pub fn build_lateral_field_from(
    directions: &[Direction],
    responses: &HrtfResponses,
    lateral_grid: &[f64],
    n_intraconic: usize,
) -> Result<LateralSteeringField> {
    if n_intraconic < 2 {
        return Err(Error::invalid("need at least two intraconic samples"));
    }
    if lateral_grid.is_empty() || responses.frequencies.is_empty() {
        return Err(Error::invalid("empty lateral or frequency grid"));
    }
    if lateral_grid.iter().any(|l| !(0.0..=180.0).contains(l)) {
        return Err(Error::invalid("lateral angles must lie in [0, 180]"));
    }
    let cones: Vec<Vec<usize>> = lateral_grid
        .iter()
        .map(|&lat| cone_members(directions, lat, n_intraconic))
        .collect();
    for (lat, members) in lateral_grid.iter().zip(&cones) {
        // The poles are single points; every other cone needs two directions.
        let pole = *lat == 0.0 || *lat == 180.0;
        if members.len() < 2 && !pole {
            return Err(Error::Degenerate(format!(
                "cone at lateral {lat} deg has only {} distinct HRTF direction(s)",
                members.len()
            )));
        }
    }

    let rows: Vec<(Vec<[C64; 2]>, Vec<[f64; 2]>, Vec<f64>)> = cones
        .par_iter()
        .map(|members| {
            let mut u = Vec::with_capacity(responses.frequencies.len());
            let mut s = Vec::with_capacity(responses.frequencies.len());
            let mut r = Vec::with_capacity(responses.frequencies.len());
            for fi in 0..responses.frequencies.len() {
                let cols: Vec<[C64; 2]> = members.iter().map(|&d| responses.get(fi, d)).collect();
                let (u1, sv, rank) = steering_from_columns(&cols);
                u.push(u1);
                s.push(sv);
                r.push(rank);
            }
            (u, s, r)
        })
        .collect();

    let mut field = LateralSteeringField {
        lateral_grid: lateral_grid.to_vec(),
        frequency_grid: responses.frequencies.clone(),
        cones,
        u1: Vec::with_capacity(rows.len()),
        singular_values: Vec::with_capacity(rows.len()),
        effective_rank: Vec::with_capacity(rows.len()),
    };
    for (u, s, r) in rows {
        field.u1.push(u);
        field.singular_values.push(s);
        field.effective_rank.push(r);
    }
    Ok(field)
}

impl LateralSteeringField {
    /// Effective ranks of every (lateral, frequency) cell inside the given
    /// ranges (inclusive).
    pub fn ranks_within(&self, lateral: (f64, f64), frequency: (f64, f64)) -> Vec<f64> {
        let mut out = Vec::new();
        for (li, lat) in self.lateral_grid.iter().enumerate() {
            if *lat < lateral.0 || *lat > lateral.1 {
                continue;
            }
            for (fi, f) in self.frequency_grid.iter().enumerate() {
                if *f >= frequency.0 && *f <= frequency.1 {
                    out.push(self.effective_rank[li][fi]);
                }
            }
        }
        out
    }
}

/// Median of a non-empty slice (mean of the middle pair for even lengths).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hrtf::grid::{interaural_grid, lateral_grid};
    use crate::linalg::{canonical_phase, normalized};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn effective_rank_values() {
        assert_eq!(effective_rank(&[1.0, 0.0]).unwrap(), 1.0);
        assert!((effective_rank(&[1.0, 1.0]).unwrap() - 2.0).abs() < 1e-15);
        let expect =
            (-(2.0f64 / 3.0) * (2.0f64 / 3.0).ln() - (1.0f64 / 3.0) * (1.0f64 / 3.0).ln()).exp();
        assert!((effective_rank(&[1.0, 0.5]).unwrap() - expect).abs() < 1e-15);
        assert!((expect - 1.8899).abs() < 1e-4);
        assert!(effective_rank(&[0.0, 0.0]).is_err());
        assert!(effective_rank(&[-1.0, 2.0]).is_err());
    }

    #[test]
    fn equal_columns_are_rank_one() {
        let h = [c(0.2, 0.4), c(-0.3, 0.1)];
        let (u, s, r) = steering_from_columns(&[h; 6]);
        let expect = canonical_phase(normalized(h));
        assert!((u[0] - expect[0]).norm() < 1e-12 && (u[1] - expect[1]).norm() < 1e-12);
        assert_eq!(s[1], 0.0);
        assert_eq!(r, 1.0);
    }

    #[test]
    fn orthonormal_columns_are_rank_two() {
        let (_, s, r) =
            steering_from_columns(&[[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]);
        assert!((s[0] - 1.0).abs() < 1e-15 && (s[1] - 1.0).abs() < 1e-15);
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cones_on_matching_grid_are_exact() {
        let dirs = interaural_grid(2.0, 24);
        let lats = lateral_grid(2.0);
        for &lat in &lats {
            let members = cone_members(&dirs, lat, 36);
            let expect = if lat == 0.0 || lat == 180.0 { 1 } else { 24 };
            assert_eq!(members.len(), expect, "lateral {lat}");
            for m in members {
                assert!((dirs[m].to_interaural().lateral - lat).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sparse_set_is_rejected() {
        let set = HrtfSet::new(
            16000,
            vec![Direction::new(0.0, 0.0)],
            vec![vec![1.0]],
            vec![vec![1.0]],
        )
        .unwrap();
        assert!(matches!(
            build_lateral_field(&set, &[90.0], 8, &[1000.0]),
            Err(Error::Degenerate(_))
        ));
        assert!(build_lateral_field(&set, &[90.0], 1, &[1000.0]).is_err());
    }

    proptest! {
        #[test]
        fn u1_invariant_to_permutation_and_global_phase(
            vals in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 3..8),
            phase in 0.0f64..6.28,
            rot in 1usize..7,
        ) {
            let cols: Vec<[C64; 2]> = vals.iter().map(|v| [c(v.0, v.1), c(v.2, v.3)]).collect();
            let (u, s, _) = steering_from_columns(&cols);
            prop_assume!(s[0] - s[1] > 1e-3 * s[0]);
            let mut permuted = cols.clone();
            permuted.rotate_left(rot % cols.len());
            let g = C64::from_polar(1.0, phase);
            let rotated: Vec<[C64; 2]> = permuted.iter().map(|v| [v[0] * g, v[1] * g]).collect();
            let (u2, s2, _) = steering_from_columns(&rotated);
            prop_assert!((s[0] - s2[0]).abs() < 1e-10);
            prop_assert!((u[0] - u2[0]).norm() < 1e-8 && (u[1] - u2[1]).norm() < 1e-8);
            prop_assert!((u[0].norm_sqr() + u[1].norm_sqr() - 1.0).abs() < 1e-12);
            prop_assert!(u[0].im == 0.0 && u[0].re >= 0.0);
            prop_assert!(s[0] >= s[1] && s[1] >= 0.0);
        }
    }
}
