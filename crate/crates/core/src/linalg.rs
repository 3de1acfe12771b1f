//! Closed-form kernels for the 2x2 Hermitian and 2xN complex matrices that
//! show up everywhere in a two-microphone array.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;

/// Hermitian 2x2 matrix `[[a, b], [conj(b), d]]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Hermitian2 {
    pub a: f64,
    pub d: f64,
    pub b: C64,
}

/// Eigen-decomposition of a [`Hermitian2`], ordered by decreasing eigenvalue.
///
/// For a positive semi-definite input the eigenvalues coincide with the
/// singular values and `vectors[0]`/`vectors[1]` are the signal and noise
/// subspace bases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigen2 {
    pub values: [f64; 2],
    pub vectors: [[C64; 2]; 2],
}

impl Hermitian2 {
    pub const ZERO: Hermitian2 = Hermitian2 {
        a: 0.0,
        d: 0.0,
        b: C64::new(0.0, 0.0),
    };

    /// `v v^H`
    #[inline]
    pub fn outer(v: [C64; 2]) -> Self {
        Hermitian2 {
            a: v[0].norm_sqr(),
            d: v[1].norm_sqr(),
            b: v[0] * v[1].conj(),
        }
    }

    #[inline]
    pub fn add_outer(&mut self, v: [C64; 2]) {
        self.a += v[0].norm_sqr();
        self.d += v[1].norm_sqr();
        self.b += v[0] * v[1].conj();
    }

    #[inline]
    pub fn scaled(self, s: f64) -> Self {
        Hermitian2 {
            a: self.a * s,
            d: self.d * s,
            b: self.b * s,
        }
    }

    #[inline]
    pub fn add(self, other: Self) -> Self {
        Hermitian2 {
            a: self.a + other.a,
            d: self.d + other.d,
            b: self.b + other.b,
        }
    }

    #[inline]
    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.a * self.d - self.b.norm_sqr()
    }

    /// Full matrix in row-major order.
    pub fn to_array(&self) -> [[C64; 2]; 2] {
        [
            [C64::new(self.a, 0.0), self.b],
            [self.b.conj(), C64::new(self.d, 0.0)],
        ]
    }

    pub fn mul_vec(&self, v: [C64; 2]) -> [C64; 2] {
        [
            v[0] * self.a + self.b * v[1],
            self.b.conj() * v[0] + v[1] * self.d,
        ]
    }

    /// Eigenvalues and eigenvectors. The smaller eigenvalue is recovered
    /// from the determinant, which keeps it accurate for nearly rank-1
    /// matrices.
    pub fn eigen(&self) -> Eigen2 {
        eigen_from_parts(self.a, self.d, self.b, self.det())
    }
}

fn eigen_from_parts(a: f64, d: f64, b: C64, det: f64) -> Eigen2 {
    let half_tr = 0.5 * (a + d);
    let disc = (0.5 * (a - d)).hypot(b.norm());
    let l1 = half_tr + disc;
    let l2 = if l1 > 0.0 { det / l1 } else { half_tr - disc };
    let v = principal_vector(a, d, b, l1);
    let minor = [-v[1].conj(), v[0].conj()];
    Eigen2 {
        values: [l1, l2],
        vectors: [v, minor],
    }
}

fn principal_vector(a: f64, d: f64, b: C64, l1: f64) -> [C64; 2] {
    // Null vectors of (M - l1 I) from either row; keep the better conditioned one.
    let r0 = [b, C64::new(l1 - a, 0.0)];
    let r1 = [C64::new(l1 - d, 0.0), b.conj()];
    let n0 = r0[0].norm_sqr() + r0[1].norm_sqr();
    let n1 = r1[0].norm_sqr() + r1[1].norm_sqr();
    let (v, n) = if n0 >= n1 { (r0, n0) } else { (r1, n1) };
    if n == 0.0 || !n.is_finite() {
        // Scalar multiple of the identity: any basis works.
        return if a >= d {
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
        } else {
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
        };
    }
    let s = 1.0 / n.sqrt();
    [v[0] * s, v[1] * s]
}

/// Rotate a vector's global phase so that its first component is real and
/// non-negative (second component when the first vanishes).
pub fn canonical_phase(v: [C64; 2]) -> [C64; 2] {
    let pivot = if v[0].norm() > 0.0 { v[0] } else { v[1] };
    let r = pivot.norm();
    if r == 0.0 {
        return v;
    }
    let rot = pivot.conj() / r;
    let mut out = [v[0] * rot, v[1] * rot];
    if v[0].norm() > 0.0 {
        out[0] = C64::new(out[0].norm(), 0.0);
    } else {
        out[1] = C64::new(out[1].norm(), 0.0);
    }
    out
}

#[inline]
pub fn norm2(v: [C64; 2]) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

/// `|a^H b|^2` for 2-vectors.
#[inline]
pub fn inner_abs2(a: [C64; 2], b: [C64; 2]) -> f64 {
    (a[0].conj() * b[0] + a[1].conj() * b[1]).norm_sqr()
}

/// Normalise to unit 2-norm; zero vectors are returned unchanged.
pub fn normalized(v: [C64; 2]) -> [C64; 2] {
    let n = norm2(v);
    if n == 0.0 {
        v
    } else {
        [v[0] / n, v[1] / n]
    }
}

/// Singular values and dominant left singular vector of a 2xN matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Svd2xN {
    /// `sigma_1 >= sigma_2 >= 0`
    pub singular_values: [f64; 2],
    /// Dominant left singular vector, phase-canonicalised.
    pub u1: [C64; 2],
}

/// SVD of the 2xN matrix with rows `top` and `bottom`.
///
/// The Gram determinant is evaluated with the Cauchy-Binet sum over 2x2
/// minors, so a matrix with proportional columns yields an exactly zero
/// second singular value rather than a rounding residue.
pub fn svd_2xn(top: &[C64], bottom: &[C64]) -> Svd2xN {
    debug_assert_eq!(top.len(), bottom.len());
    let mut a = 0.0;
    let mut d = 0.0;
    let mut b = C64::new(0.0, 0.0);
    for (&x, &y) in top.iter().zip(bottom) {
        a += x.norm_sqr();
        d += y.norm_sqr();
        b += x * y.conj();
    }
    let mut det = 0.0;
    for i in 0..top.len() {
        for j in (i + 1)..top.len() {
            det += (top[i] * bottom[j] - top[j] * bottom[i]).norm_sqr();
        }
    }
    let eig = eigen_from_parts(a, d, b, det);
    Svd2xN {
        singular_values: [eig.values[0].max(0.0).sqrt(), eig.values[1].max(0.0).sqrt()],
        u1: canonical_phase(eig.vectors[0]),
    }
}

/// Inverse of a general complex 2x2 matrix, `None` when singular.
pub fn inverse2(m: [[C64; 2]; 2]) -> Option<[[C64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if det.norm() <= 1e-14 * scale * scale || !det.is_finite() {
        return None;
    }
    let inv = det.inv();
    Some([
        [m[1][1] * inv, -m[0][1] * inv],
        [-m[1][0] * inv, m[0][0] * inv],
    ])
}

pub fn matmul2(x: [[C64; 2]; 2], y: [[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

#[inline]
pub fn matvec2(m: &[[C64; 2]; 2], v: [C64; 2]) -> [C64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}
