//! Least-squares focusing matrices mapping the HRTF array manifold at one
//! frequency onto the manifold at a reference frequency.

use serde::{Deserialize, Serialize};

use super::set::HrtfResponses;
use crate::error::{Error, Result};
use crate::linalg::{inverse2, matmul2, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FocusingOperator {
    /// Indices into the frequency grid the operator was built on.
    pub band: Vec<usize>,
    /// Index of the reference frequency.
    pub reference: usize,
    /// Reference frequency in Hz.
    pub center: f64,
    /// One 2x2 matrix per band entry.
    pub matrices: Vec<[[C64; 2]; 2]>,
    /// `||T H_w - H_0||_F / ||H_0||_F` per band entry.
    pub residuals: Vec<f64>,
}

impl FocusingOperator {
    /// Matrix for grid frequency `index`, if it is in the band.
    pub fn matrix_for(&self, index: usize) -> Option<&[[C64; 2]; 2]> {
        self.band
            .iter()
            .position(|&b| b == index)
            .map(|p| &self.matrices[p])
    }

    pub fn residual_for(&self, index: usize) -> Option<f64> {
        self.band
            .iter()
            .position(|&b| b == index)
            .map(|p| self.residuals[p])
    }
}

/// `T(w, w0) = H0 Hw^H (Hw Hw^H)^-1` over every direction of the set, for
/// each grid frequency in `band`.
pub fn build_focusing(
    responses: &HrtfResponses,
    band: &[usize],
    reference: usize,
) -> Result<FocusingOperator> {
    if band.is_empty() {
        return Err(Error::invalid("empty focusing band"));
    }
    if !band.contains(&reference) {
        return Err(Error::invalid("reference frequency must lie in the band"));
    }
    let n_freq = responses.frequencies.len();
    if band.iter().any(|&b| b >= n_freq) {
        return Err(Error::GridMismatch(
            "band index outside the frequency grid".into(),
        ));
    }
    let h0 = &responses.values[reference];
    let h0_norm2: f64 = h0.iter().map(|v| v[0].norm_sqr() + v[1].norm_sqr()).sum();
    if h0_norm2 == 0.0 {
        return Err(Error::Degenerate(
            "zero HRTF manifold at the reference frequency".into(),
        ));
    }

    let mut matrices = Vec::with_capacity(band.len());
    let mut residuals = Vec::with_capacity(band.len());
    for &b in band {
        let hw = &responses.values[b];
        let zero = C64::new(0.0, 0.0);
        let mut cross = [[zero; 2]; 2];
        let mut gram = [[zero; 2]; 2];
        for (a, w) in h0.iter().zip(hw) {
            for i in 0..2 {
                for j in 0..2 {
                    cross[i][j] += a[i] * w[j].conj();
                    gram[i][j] += w[i] * w[j].conj();
                }
            }
        }
        let t = if b == reference {
            // Exact solution; avoids rounding from the normal equations.
            [[C64::new(1.0, 0.0), zero], [zero, C64::new(1.0, 0.0)]]
        } else {
            let inv = inverse2(gram).ok_or_else(|| {
                Error::Degenerate(format!(
                    "singular HRTF normal matrix at {} Hz",
                    responses.frequencies[b]
                ))
            })?;
            matmul2(cross, inv)
        };
        let err: f64 = h0
            .iter()
            .zip(hw)
            .map(|(a, w)| {
                let m = [
                    t[0][0] * w[0] + t[0][1] * w[1],
                    t[1][0] * w[0] + t[1][1] * w[1],
                ];
                (m[0] - a[0]).norm_sqr() + (m[1] - a[1]).norm_sqr()
            })
            .sum();
        matrices.push(t);
        residuals.push((err / h0_norm2).sqrt());
    }
    Ok(FocusingOperator {
        band: band.to_vec(),
        reference,
        center: responses.frequencies[reference],
        matrices,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn table(sets: Vec<Vec<[C64; 2]>>) -> HrtfResponses {
        HrtfResponses {
            frequencies: (0..sets.len()).map(|i| 1000.0 * (i + 1) as f64).collect(),
            values: sets,
        }
    }

    fn manifold() -> Vec<[C64; 2]> {
        vec![
            [c(1.0, 0.0), c(0.5, 0.5)],
            [c(0.2, -0.3), c(1.0, 0.1)],
            [c(-0.4, 0.8), c(0.3, 0.0)],
        ]
    }

    #[test]
    fn self_alignment_is_identity() {
        let r = table(vec![manifold(), manifold()]);
        let op = build_focusing(&r, &[0, 1], 1).unwrap();
        let t = op.matrix_for(1).unwrap();
        assert_eq!(t[0][0], c(1.0, 0.0));
        assert_eq!(op.residual_for(1), Some(0.0));
        // Identical manifolds: the other bin also maps to identity.
        let t0 = op.matrix_for(0).unwrap();
        assert!((t0[0][0] - c(1.0, 0.0)).norm() < 1e-12 && t0[0][1].norm() < 1e-12);
        assert!(op.residual_for(0).unwrap() <= 1e-10);
    }

    #[test]
    fn scaled_manifold_gives_inverse_scale() {
        let s = c(2.0, -1.0);
        let scaled: Vec<[C64; 2]> = manifold().iter().map(|v| [v[0] * s, v[1] * s]).collect();
        let r = table(vec![scaled, manifold()]);
        let op = build_focusing(&r, &[0, 1], 1).unwrap();
        let t = op.matrix_for(0).unwrap();
        let inv = s.inv();
        assert!((t[0][0] - inv).norm() < 1e-12 && (t[1][1] - inv).norm() < 1e-12);
        assert!(t[0][1].norm() < 1e-12 && t[1][0].norm() < 1e-12);
    }

    #[test]
    fn errors() {
        let r = table(vec![manifold(), manifold()]);
        assert!(build_focusing(&r, &[], 0).is_err());
        assert!(build_focusing(&r, &[0], 1).is_err());
        assert!(build_focusing(&r, &[0, 5], 0).is_err());
        let flat = table(vec![vec![[c(1.0, 0.0), c(2.0, 0.0)]; 3], manifold()]);
        assert!(matches!(
            build_focusing(&flat, &[0, 1], 1),
            Err(Error::Degenerate(_))
        ));
    }
}
