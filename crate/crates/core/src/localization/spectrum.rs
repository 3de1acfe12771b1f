//! Focusing, time-frequency smoothing of the spatial correlation matrix and
//! the direct-path dominance test.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DpdMode, SmoothingParams};
use crate::error::{Error, Result};
use crate::hrtf::FocusingOperator;
use crate::linalg::{matvec2, Hermitian2, C64};
use crate::timefreq::TfRepresentation;

/// Apply `T(w, w0)` to every frame of the band channels. The output holds
/// only the band channels, in band order.
pub fn apply_focusing(
    left: &TfRepresentation,
    right: &TfRepresentation,
    op: &FocusingOperator,
) -> Result<(TfRepresentation, TfRepresentation)> {
    if !left.same_grid(right) {
        return Err(Error::GridMismatch("left and right grids differ".into()));
    }
    if op.band.iter().any(|&c| c >= left.n_channels()) {
        return Err(Error::GridMismatch(
            "focusing band exceeds the channel count".into(),
        ));
    }
    let mut l = left.select(&op.band);
    let mut r = right.select(&op.band);
    for (k, t) in op.matrices.iter().enumerate() {
        for (a, b) in l.channels[k].iter_mut().zip(r.channels[k].iter_mut()) {
            let out = matvec2(t, [*a, *b]);
            *a = out[0];
            *b = out[1];
        }
    }
    Ok((l, r))
}

/// One smoothed time-frequency bin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatialBin {
    /// Channel index in the analysed representation.
    pub channel: usize,
    /// Frame index within that channel.
    pub frame: usize,
    pub frequency: f64,
    /// Frame time in seconds.
    pub time: f64,
    pub r: Hermitian2,
    pub sigma_s: f64,
    pub sigma_n: f64,
    pub q_s: [C64; 2],
    pub q_n: [C64; 2],
}

impl SpatialBin {
    /// `sigma_s / sigma_n`, infinite for an exactly rank-1 matrix.
    pub fn ratio(&self) -> f64 {
        if self.sigma_n > 0.0 {
            self.sigma_s / self.sigma_n
        } else if self.sigma_s > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }

    fn new(channel: usize, frame: usize, frequency: f64, time: f64, r: Hermitian2) -> Self {
        let e = r.eigen();
        SpatialBin {
            channel,
            frame,
            frequency,
            time,
            r,
            sigma_s: e.values[0].max(0.0),
            sigma_n: e.values[1].max(0.0),
            q_s: e.vectors[0],
            q_n: e.vectors[1],
        }
    }
}

/// Smoothed correlation matrices and their eigen-pairs, ordered by
/// (channel, frame).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpatialSpectrumField {
    pub bins: Vec<SpatialBin>,
    /// Indices into `bins` passing the DPD test, ascending.
    pub pass_set: Vec<usize>,
}

impl SpatialSpectrumField {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn extend(&mut self, other: SpatialSpectrumField) {
        self.bins.extend(other.bins);
    }

    pub fn passed(&self) -> impl Iterator<Item = &SpatialBin> {
        self.pass_set.iter().map(|&i| &self.bins[i])
    }
}

/// Index of the frame of `channel` nearest in time to `time`.
fn nearest_frame(tf: &TfRepresentation, channel: usize, time: f64) -> usize {
    (time / tf.time_steps[channel]).round() as usize
}

/// Trailing-window estimate
/// `R(m, c) = 1/J_w sum_j 1/J_t(c-j) sum_i p(e_j - i, c - j) p^H(...)`
/// where `e_j` is the frame of channel `c - j` nearest in time to frame
/// `m` of channel `c`, and `J_t` is resolved per channel from the time
/// window. With a uniform frame grid this is the plain `1/(J_t J_w)` double
/// sum. Only bins whose whole window lies inside the data are produced.
pub fn spatial_spectrum(
    left: &TfRepresentation,
    right: &TfRepresentation,
    params: &SmoothingParams,
) -> Result<SpatialSpectrumField> {
    params.validate()?;
    if !left.same_grid(right) {
        return Err(Error::GridMismatch("left and right grids differ".into()));
    }
    let n_ch = left.n_channels();
    if params.j_omega > n_ch {
        return Err(Error::invalid(format!(
            "J_omega = {} exceeds the {} available channels",
            params.j_omega, n_ch
        )));
    }
    let j_tau: Vec<usize> = left.time_steps.iter().map(|&s| params.j_tau(s)).collect();
    let targets: Vec<usize> = (params.j_omega - 1..n_ch)
        .filter(|&c| left.frequencies[c] >= params.band.0 && left.frequencies[c] <= params.band.1)
        .collect();
    let fits = targets
        .iter()
        .any(|&c| (0..params.j_omega).all(|j| left.frames(c - j) >= j_tau[c - j]));
    if !fits {
        return Err(Error::invalid(
            "smoothing window larger than the available grid",
        ));
    }

    let per_channel: Vec<Vec<SpatialBin>> = targets
        .par_iter()
        .map(|&c| {
            let step = left.time_steps[c];
            let mut bins = Vec::new();
            'frames: for m in 0..left.frames(c) {
                let t = m as f64 * step;
                let mut r = Hermitian2::ZERO;
                for j in 0..params.j_omega {
                    let cj = c - j;
                    let e = if j == 0 {
                        m
                    } else {
                        nearest_frame(left, cj, t)
                    };
                    let jt = j_tau[cj];
                    if e + 1 < jt || e >= left.frames(cj) {
                        continue 'frames;
                    }
                    let mut acc = Hermitian2::ZERO;
                    for i in 0..jt {
                        acc.add_outer([left.channels[cj][e - i], right.channels[cj][e - i]]);
                    }
                    r = r.add(acc.scaled(1.0 / jt as f64));
                }
                let r = r.scaled(1.0 / params.j_omega as f64);
                bins.push(SpatialBin::new(c, m, left.frequencies[c], t, r));
            }
            bins
        })
        .collect();
    Ok(SpatialSpectrumField {
        bins: per_channel.into_iter().flatten().collect(),
        pass_set: Vec::new(),
    })
}

/// Direct-path dominance test. Bins with `sigma_s = 0` never pass. The
/// result is sorted by bin index.
pub fn dpd_select(field: &SpatialSpectrumField, mode: DpdMode) -> Result<Vec<usize>> {
    if field.is_empty() {
        return Err(Error::invalid("empty spatial spectrum field"));
    }
    let mut pass: Vec<usize> = match mode {
        DpdMode::Threshold(th) => {
            if !(th > 0.0) {
                return Err(Error::invalid("DPD threshold must be positive"));
            }
            (0..field.len())
                .filter(|&i| field.bins[i].sigma_s > 0.0 && field.bins[i].ratio() >= th)
                .collect()
        }
        DpdMode::TopFraction(q) => {
            if !(q > 0.0 && q <= 1.0) {
                return Err(Error::invalid(format!("DPD fraction {q} outside (0, 1]")));
            }
            let count = (q * field.len() as f64).round() as usize;
            let mut eligible: Vec<usize> = (0..field.len())
                .filter(|&i| field.bins[i].sigma_s > 0.0)
                .collect();
            // Ratio descending, then sigma_s descending, then bin order.
            eligible.sort_by(|&a, &b| {
                let (x, y) = (&field.bins[a], &field.bins[b]);
                y.ratio()
                    .total_cmp(&x.ratio())
                    .then(y.sigma_s.total_cmp(&x.sigma_s))
                    .then(a.cmp(&b))
            });
            eligible.truncate(count);
            eligible
        }
    };
    pass.sort_unstable();
    Ok(pass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timefreq::FrontendKind;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_tf(rng: &mut ChaCha8Rng, steps: &[f64], frames: &[usize]) -> TfRepresentation {
        TfRepresentation {
            frontend: FrontendKind::Afb,
            frequencies: (0..steps.len())
                .map(|i| 1000.0 + 100.0 * i as f64)
                .collect(),
            time_steps: steps.to_vec(),
            channels: frames
                .iter()
                .map(|&n| {
                    (0..n)
                        .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                        .collect()
                })
                .collect(),
        }
    }

    fn params(window: f64, j_omega: usize) -> SmoothingParams {
        SmoothingParams {
            time_window: window,
            j_omega,
            band: (0.0, 1e9),
        }
    }

    #[test]
    fn single_outer_product_is_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let l = random_tf(&mut rng, &[0.01], &[20]);
        let r = random_tf(&mut rng, &[0.01], &[20]);
        let f = spatial_spectrum(&l, &r, &params(0.01, 1)).unwrap();
        assert_eq!(f.len(), 20);
        for b in &f.bins {
            let p = [l.channels[0][b.frame], r.channels[0][b.frame]];
            assert_eq!(b.r, Hermitian2::outer(p));
            assert!(b.sigma_n <= 1e-15 * b.sigma_s);
        }
    }

    #[test]
    fn uniform_grid_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (jt, jw) = (4usize, 3usize);
        let l = random_tf(&mut rng, &[0.016; 5], &[30; 5]);
        let r = random_tf(&mut rng, &[0.016; 5], &[30; 5]);
        let f = spatial_spectrum(&l, &r, &params(0.064, jw)).unwrap();
        assert_eq!(f.len(), 3 * (30 - jt + 1));
        for b in &f.bins {
            let mut naive = [[c(0.0, 0.0); 2]; 2];
            for jtau in 0..jt {
                for jom in 0..jw {
                    let p = [
                        l.channels[b.channel - jom][b.frame - jtau],
                        r.channels[b.channel - jom][b.frame - jtau],
                    ];
                    for i in 0..2 {
                        for k in 0..2 {
                            naive[i][k] += p[i] * p[k].conj() / (jt * jw) as f64;
                        }
                    }
                }
            }
            let got = b.r.to_array();
            for i in 0..2 {
                for k in 0..2 {
                    assert!((got[i][k] - naive[i][k]).norm() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn variable_rate_alignment() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let l = random_tf(&mut rng, &[0.008, 0.005], &[40, 64]);
        let r = random_tf(&mut rng, &[0.008, 0.005], &[40, 64]);
        let f = spatial_spectrum(&l, &r, &params(0.02, 2)).unwrap();
        // J_t = 3 frames for channel 0, 4 for channel 1.
        for b in &f.bins {
            assert_eq!(b.channel, 1);
            let e = (b.frame as f64 * 0.005 / 0.008).round() as usize;
            let mut naive = Hermitian2::ZERO;
            for i in 0..4 {
                naive = naive.add(
                    Hermitian2::outer([l.channels[1][b.frame - i], r.channels[1][b.frame - i]])
                        .scaled(0.125),
                );
            }
            for i in 0..3 {
                naive = naive.add(
                    Hermitian2::outer([l.channels[0][e - i], r.channels[0][e - i]])
                        .scaled(1.0 / 6.0),
                );
            }
            assert!((b.r.a - naive.a).abs() < 1e-12 && (b.r.b - naive.b).norm() < 1e-12);
        }
        // Frame 3 is the first with four frames of history; it maps to
        // channel-0 frame 2, which has exactly three.
        assert_eq!(f.bins[0].frame, 3);
    }

    #[test]
    fn window_too_large() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let l = random_tf(&mut rng, &[0.01], &[3]);
        let r = random_tf(&mut rng, &[0.01], &[3]);
        assert!(spatial_spectrum(&l, &r, &params(0.05, 1)).is_err());
        assert!(spatial_spectrum(&l, &r, &params(0.01, 2)).is_err());
    }

    fn field_with_ratios(ratios: &[f64]) -> SpatialSpectrumField {
        SpatialSpectrumField {
            bins: ratios
                .iter()
                .enumerate()
                .map(|(i, &q)| {
                    let r = Hermitian2 {
                        a: q,
                        d: 1.0,
                        b: c(0.0, 0.0),
                    };
                    SpatialBin::new(0, i, 1000.0, i as f64, r)
                })
                .collect(),
            pass_set: Vec::new(),
        }
    }

    #[test]
    fn threshold_and_fraction() {
        let f = field_with_ratios(&[10.0, 5.0, 2.0, 1.0]);
        assert_eq!(dpd_select(&f, DpdMode::Threshold(4.0)).unwrap(), vec![0, 1]);
        assert_eq!(
            dpd_select(&f, DpdMode::TopFraction(1.0)).unwrap(),
            vec![0, 1, 2, 3]
        );
        assert_eq!(
            dpd_select(&f, DpdMode::TopFraction(0.5)).unwrap(),
            vec![0, 1]
        );
        assert!(dpd_select(&f, DpdMode::TopFraction(0.0)).is_err());
        assert!(dpd_select(&SpatialSpectrumField::default(), DpdMode::TopFraction(0.5)).is_err());
    }

    #[test]
    fn fraction_of_ten_thousand() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ratios: Vec<f64> = (0..10_000).map(|_| rng.gen_range(1.0..100.0)).collect();
        let n = dpd_select(&field_with_ratios(&ratios), DpdMode::TopFraction(0.05))
            .unwrap()
            .len();
        assert!((480..=520).contains(&n));
    }

    #[test]
    fn silent_bins_never_pass() {
        let mut f = field_with_ratios(&[3.0, 2.0]);
        f.bins
            .push(SpatialBin::new(0, 2, 1000.0, 2.0, Hermitian2::ZERO));
        assert_eq!(
            dpd_select(&f, DpdMode::TopFraction(1.0)).unwrap(),
            vec![0, 1]
        );
        assert_eq!(
            dpd_select(&f, DpdMode::Threshold(1e-9)).unwrap(),
            vec![0, 1]
        );
    }

    #[test]
    fn ties_prefer_stronger_then_earlier_bins() {
        let mut f = field_with_ratios(&[2.0, 2.0, 2.0]);
        f.bins[2].sigma_s *= 10.0;
        f.bins[2].sigma_n *= 10.0;
        assert_eq!(dpd_select(&f, DpdMode::TopFraction(0.34)).unwrap(), vec![2]);
        assert_eq!(
            dpd_select(&f, DpdMode::TopFraction(0.67)).unwrap(),
            vec![0, 2]
        );
    }

    #[test]
    fn focusing_identity_and_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let l = random_tf(&mut rng, &[0.01; 3], &[5; 3]);
        let r = random_tf(&mut rng, &[0.01; 3], &[5; 3]);
        let id = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        let op = FocusingOperator {
            band: vec![1, 2],
            reference: 2,
            center: 1200.0,
            matrices: vec![[[c(0.0, 0.0); 2]; 2], id],
            residuals: vec![0.0, 0.0],
        };
        let (fl, fr) = apply_focusing(&l, &r, &op).unwrap();
        assert_eq!(fl.channels[1], l.channels[2]);
        assert_eq!(fr.channels[1], r.channels[2]);
        assert!(fl.channels[0].iter().all(|z| z.norm() == 0.0));
        assert_eq!(fl.frequencies, vec![l.frequencies[1], l.frequencies[2]]);
    }

    proptest::proptest! {
        #[test]
        fn psd_and_scale_invariance(seed in 0u64..1000, scale_re in 0.1f64..3.0, scale_im in -3.0f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = random_tf(&mut rng, &[0.004, 0.003], &[30, 40]);
            let r = random_tf(&mut rng, &[0.004, 0.003], &[30, 40]);
            let p = params(0.012, 2);
            let f = spatial_spectrum(&l, &r, &p).unwrap();
            for b in &f.bins {
                proptest::prop_assert!(b.sigma_n >= 0.0 && b.sigma_s >= b.sigma_n);
                proptest::prop_assert!(b.r.eigen().values[1] >= -1e-10);
            }
            let s = c(scale_re, scale_im);
            let scale = |tf: &TfRepresentation| {
                let mut t = tf.clone();
                t.channels.iter_mut().flatten().for_each(|z| *z *= s);
                t
            };
            let g = spatial_spectrum(&scale(&l), &scale(&r), &p).unwrap();
            let mode = DpdMode::TopFraction(0.3);
            for (a, b) in f.bins.iter().zip(&g.bins) {
                let rel = (a.ratio() - b.ratio()).abs() / a.ratio();
                proptest::prop_assert!(rel < 1e-6);
            }
            proptest::prop_assert_eq!(dpd_select(&f, mode).unwrap(), dpd_select(&g, mode).unwrap());
        }
    }
}
