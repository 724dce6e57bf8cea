//! Gluing matrices, their real logarithms, and the z-dependent fiber metric
//! `G(z) = exp(-z G0^T) exp(-z G0)` on the cylinder `T^2 x R`.
//!
//! The full metric is `dz^2 + g11 dx^2 + 2 g12 dx dy + g22 dy^2`; the `z`
//! direction is orthogonal to the fiber and has unit length.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};

/// Closed-form exponential of a real 2x2 matrix.
///
/// Writes `M = sI + K` with `K` traceless, so `K^2 = delta I` and
/// `exp(M) = e^s (c(delta) I + sh(delta) K)`.
pub fn expm2(m: &Matrix2<f64>) -> Matrix2<f64> {
    let s = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let k = m - Matrix2::identity() * s;
    let delta = k[(0, 0)] * k[(0, 0)] + k[(0, 1)] * k[(1, 0)];
    let (c, sh) = even_odd_parts(delta);
    (Matrix2::identity() * c + k * sh) * s.exp()
}

/// `(cosh q, sinh q / q)` with `q^2 = delta`, continued analytically through
/// `delta <= 0`.
fn even_odd_parts(delta: f64) -> (f64, f64) {
    if delta.abs() < 1e-8 {
        let c = 1.0 + delta / 2.0 + delta * delta / 24.0;
        let sh = 1.0 + delta / 6.0 + delta * delta / 120.0;
        (c, sh)
    } else if delta > 0.0 {
        let q = delta.sqrt();
        (q.cosh(), q.sinh() / q)
    } else {
        let q = (-delta).sqrt();
        (q.cos(), q.sin() / q)
    }
}

/// Eigenvalues of an integer 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eigenvalues {
    /// Real pair, `larger >= smaller`.
    Real(f64, f64),
    /// Complex-conjugate pair `re +- i im`.
    Complex(f64, f64),
}

impl fmt::Display for Eigenvalues {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Eigenvalues::Real(a, b) => write!(f, "{a}, {b}"),
            Eigenvalues::Complex(re, im) => write!(f, "{re} +- {im}i"),
        }
    }
}

/// A 2x2 integer matrix with determinant +-1, used as the monodromy of the
/// torus bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GluingMatrix {
    entries: [[i64; 2]; 2],
}

impl GluingMatrix {
    pub fn new(entries: [[i64; 2]; 2]) -> Result<Self> {
        let det = entries[0][0] * entries[1][1] - entries[0][1] * entries[1][0];
        if det.abs() != 1 {
            return Err(Error::NotUnimodular(entries, det));
        }
        Ok(Self { entries })
    }

    /// The hyperbolic cat map `[[2,1],[1,1]]`.
    pub fn cat() -> Self {
        Self { entries: [[2, 1], [1, 1]] }
    }

    /// The unipotent shear `[[1,1],[0,1]]` of the nilmanifold example.
    pub fn shear() -> Self {
        Self { entries: [[1, 1], [0, 1]] }
    }

    pub fn identity() -> Self {
        Self { entries: [[1, 0], [0, 1]] }
    }

    pub fn entries(&self) -> [[i64; 2]; 2] {
        self.entries
    }

    pub fn det(&self) -> i64 {
        let e = &self.entries;
        e[0][0] * e[1][1] - e[0][1] * e[1][0]
    }

    pub fn trace(&self) -> i64 {
        self.entries[0][0] + self.entries[1][1]
    }

    /// Integer inverse (exact, since `det = +-1`).
    pub fn inverse(&self) -> Self {
        let [[a, b], [c, d]] = self.entries;
        let det = self.det();
        Self {
            entries: [[det * d, -det * b], [-det * c, det * a]],
        }
    }

    pub fn transpose(&self) -> Self {
        let [[a, b], [c, d]] = self.entries;
        Self { entries: [[a, c], [b, d]] }
    }

    /// `C^{-T}`, the action of the deck map on fiber momenta.
    pub fn inverse_transpose(&self) -> Self {
        self.inverse().transpose()
    }

    pub fn as_matrix(&self) -> Matrix2<f64> {
        let [[a, b], [c, d]] = self.entries;
        Matrix2::new(a as f64, b as f64, c as f64, d as f64)
    }

    /// `C (x, y)` in floating point.
    #[inline]
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let [[a, b], [c, d]] = self.entries;
        (a as f64 * x + b as f64 * y, c as f64 * x + d as f64 * y)
    }

    /// `C v` in exact integer arithmetic; `None` on overflow.
    pub fn apply_int(&self, v: [i64; 2]) -> Option<[i64; 2]> {
        let [[a, b], [c, d]] = self.entries;
        let x = a.checked_mul(v[0])?.checked_add(b.checked_mul(v[1])?)?;
        let y = c.checked_mul(v[0])?.checked_add(d.checked_mul(v[1])?)?;
        Some([x, y])
    }

    pub fn eigenvalues(&self) -> Eigenvalues {
        let tr = self.trace() as f64;
        let det = self.det() as f64;
        let disc = tr * tr - 4.0 * det;
        if disc >= 0.0 {
            let root = disc.sqrt();
            // larger-magnitude root first, the other from the determinant
            let big = if tr >= 0.0 { 0.5 * (tr + root) } else { 0.5 * (tr - root) };
            if big == 0.0 {
                return Eigenvalues::Real(0.0, 0.0);
            }
            let small = det / big;
            Eigenvalues::Real(big.max(small), big.min(small))
        } else {
            Eigenvalues::Complex(0.5 * tr, 0.5 * (-disc).sqrt())
        }
    }

    pub fn spectral_radius(&self) -> f64 {
        match self.eigenvalues() {
            Eigenvalues::Real(a, b) => a.abs().max(b.abs()),
            Eigenvalues::Complex(re, im) => re.hypot(im),
        }
    }

    /// True for `|trace| > 2`.
    pub fn is_hyperbolic(&self) -> bool {
        self.det() == 1 && self.trace().abs() > 2 || self.det() == -1 && self.trace() != 0
    }

    /// Real logarithm `G0` with `exp(G0) = C`.
    ///
    /// Only matrices with positive real eigenvalues qualify: `det = 1` and
    /// `trace >= 2`. For `trace > 2` the closed form is
    /// `G0 = ln(mu) (2C - tr I) / sqrt(tr^2 - 4)`; for `trace = 2` the matrix is
    /// unipotent and `G0 = C - I`.
    pub fn real_log(&self) -> Result<Matrix2<f64>> {
        let reject = || Error::NoRealLogarithm {
            matrix: self.entries,
            eigenvalues: self.eigenvalues().to_string(),
        };
        if self.det() != 1 {
            return Err(reject());
        }
        let tr = self.trace();
        let c = self.as_matrix();
        match tr {
            2 => Ok(c - Matrix2::identity()),
            t if t > 2 => {
                let tr = t as f64;
                let root = (tr * tr - 4.0).sqrt();
                let log_mu = (0.5 * tr).acosh();
                Ok((c * 2.0 - Matrix2::identity() * tr) * (log_mu / root))
            }
            _ => Err(reject()),
        }
    }
}

impl FromStr for GluingMatrix {
    type Err = Error;

    /// Parses `"c11,c12,c21,c22"` (row-major).
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<i64> = s
            .split(',')
            .map(|p| p.trim().parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::MatrixParse(s.to_string()))?;
        match parts.as_slice() {
            &[a, b, c, d] => Self::new([[a, b], [c, d]]),
            _ => Err(Error::MatrixParse(s.to_string())),
        }
    }
}

impl fmt::Display for GluingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [[a, b], [c, d]] = self.entries;
        write!(f, "{a},{b},{c},{d}")
    }
}

/// The fiber metric family `G(z)` built from a gluing matrix with a real
/// logarithm. Immutable; every evaluation is a closed-form function of `z`.
#[derive(Debug, Clone)]
pub struct MetricFamily {
    gluing: GluingMatrix,
    log: Matrix2<f64>,
}

impl MetricFamily {
    pub fn new(gluing: GluingMatrix) -> Result<Self> {
        let log = gluing.real_log()?;
        Ok(Self { gluing, log })
    }

    pub fn gluing(&self) -> &GluingMatrix {
        &self.gluing
    }

    /// The logarithm `G0`.
    pub fn log(&self) -> &Matrix2<f64> {
        &self.log
    }

    /// `exp(t G0)`.
    #[inline]
    pub fn flow_exp(&self, t: f64) -> Matrix2<f64> {
        expm2(&(self.log * t))
    }

    /// `G(z) = exp(-z G0)^T exp(-z G0)`.
    pub fn metric_at(&self, z: f64) -> Matrix2<f64> {
        let e = self.flow_exp(-z);
        e.transpose() * e
    }

    /// `G(z)^{-1} = exp(z G0) exp(z G0)^T`.
    #[inline]
    pub fn co_metric_at(&self, z: f64) -> Matrix2<f64> {
        let e = self.flow_exp(z);
        e * e.transpose()
    }

    /// `d/dz G(z)^{-1} = G0 W + W G0^T` with `W = G(z)^{-1}`.
    pub fn d_co_metric_at(&self, z: f64) -> Matrix2<f64> {
        let w = self.co_metric_at(z);
        self.log * w + w * self.log.transpose()
    }

    /// `p^T G(z)^{-1} p` for a fiber momentum `p`.
    #[inline]
    pub fn co_norm_sq(&self, z: f64, p: &Vector2<f64>) -> f64 {
        let e = self.flow_exp(z);
        (e.transpose() * p).norm_squared()
    }

    /// `max |C^T G(z+1) C - G(z)|` entrywise.
    pub fn deck_invariance_defect(&self, z: f64) -> f64 {
        let c = self.gluing.as_matrix();
        let lhs = c.transpose() * self.metric_at(z + 1.0) * c;
        (lhs - self.metric_at(z)).abs().max()
    }
}
