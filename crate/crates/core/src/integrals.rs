//! First integrals of the geodesic flow and a finite-difference Poisson
//! bracket.
//!
//! On the cylinder the integrals are `F1 = p_x`, `F2 = p_y`, `F3 = H`. The deck
//! map acts on `(p_x, p_y)` by `C^{-T}`, which does not fix `F1, F2`; the
//! quotient integrals replace them with functions of `(p_x, p_y)` that are
//! invariant under that action:
//!
//! * hyperbolic `C`: `I1 = l_s l_u`, the product of the two eigen-forms, and
//!   `I2 = f(I1) sin(2 pi ln|l_s| / ln lambda)` with the flat factor
//!   `f(u) = exp(-1/u^2)`. The deck map multiplies `l_s` by `lambda`, which
//!   shifts the sine argument by exactly `2 pi`.
//! * unipotent `C = I + N`: `I1 = l` with `l` fixed by the action and
//!   `I2 = f(l) sin(2 pi m / l)` where `m` drops by `l` under the action.
//! * `C = I`: `I1 = p_x`, `I2 = p_y`.

use std::f64::consts::TAU;

use nalgebra::SMatrix;

use crate::error::{Error, Result};
use crate::flow::{hamiltonian, CoverState};
use crate::solmetric::{Eigenvalues, GluingMatrix, MetricFamily};

/// `f(u) = exp(-1/u^2)`, extended by `f(0) = 0`.
#[inline]
pub fn flat(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        (-1.0 / (u * u)).exp()
    }
}

/// The pair `(I1, I2)` of deck-invariant momentum functions for a gluing
/// matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuotientIntegrals {
    Hyperbolic {
        /// `I1 = p_x^2 + cross p_x p_y + square p_y^2`.
        cross: f64,
        square: f64,
        /// `l_s = p_x + stable p_y`, rescaled by `lambda` under the deck map.
        stable: f64,
        log_lambda: f64,
        /// `2 pi`; anything else breaks invariance.
        angular: f64,
    },
    Unipotent {
        /// `l = w . p`, fixed by the deck map.
        invariant: [f64; 2],
        /// `m = r . p`, sent to `m - l` by the deck map.
        shifting: [f64; 2],
        angular: f64,
    },
    Momenta,
}

impl QuotientIntegrals {
    pub fn for_matrix(gluing: &GluingMatrix) -> Result<Self> {
        let [[c11, c12], [c21, c22]] = gluing.entries();
        let unsupported = || {
            Error::Precondition(format!(
                "no quotient integrals built for gluing matrix {gluing} (need det 1 and |trace| >= 2)"
            ))
        };
        if gluing.det() != 1 {
            return Err(unsupported());
        }
        let tr = gluing.trace();
        if tr.abs() > 2 {
            let Eigenvalues::Real(big, small) = gluing.eigenvalues() else {
                return Err(unsupported());
            };
            let (mu_s, mu_u) = if big.abs() < small.abs() { (big, small) } else { (small, big) };
            let c12f = c12 as f64;
            Ok(Self::Hyperbolic {
                cross: (c22 - c11) as f64 / c12f,
                square: -(c21 as f64) / c12f,
                stable: (mu_s - c11 as f64) / c12f,
                log_lambda: mu_u.abs().ln(),
                angular: TAU,
            })
        } else if tr == 2 {
            let n = [[c11 - 1, c12], [c21, c22 - 1]];
            if n == [[0, 0], [0, 0]] {
                return Ok(Self::Momenta);
            }
            // kernel of N from a nonzero row; N^2 = 0 puts it in the image too
            let mut w = if n[0] != [0, 0] { [-n[0][1], n[0][0]] } else { [-n[1][1], n[1][0]] };
            if w[0] < 0 || w[0] == 0 && w[1] < 0 {
                w = [-w[0], -w[1]];
            }
            let col = if n[0][0] != 0 || n[1][0] != 0 { 0 } else { 1 };
            let column = [n[0][col], n[1][col]];
            let i = if column[0] != 0 { 0 } else { 1 };
            let alpha = w[i] as f64 / column[i] as f64;
            let mut r = [0.0; 2];
            r[col] = alpha;
            Ok(Self::Unipotent {
                invariant: [w[0] as f64, w[1] as f64],
                shifting: r,
                angular: TAU,
            })
        } else {
            Err(unsupported())
        }
    }

    /// The integrals for `[[2,1],[1,1]]`.
    pub fn cat() -> Self {
        Self::for_matrix(&GluingMatrix::cat()).expect("cat map is hyperbolic")
    }

    /// Same functions with the sine period set to 1 instead of `2 pi`.
    /// Not deck-invariant; kept as a negative control.
    pub fn without_two_pi(self) -> Self {
        match self {
            Self::Hyperbolic { cross, square, stable, log_lambda, .. } => {
                Self::Hyperbolic { cross, square, stable, log_lambda, angular: 1.0 }
            }
            Self::Unipotent { invariant, shifting, .. } => {
                Self::Unipotent { invariant, shifting, angular: 1.0 }
            }
            Self::Momenta => Self::Momenta,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Hyperbolic { .. } => "hyperbolic: I1 = l_s l_u, I2 = f(I1) sin(2pi ln|l_s|/ln lambda)",
            Self::Unipotent { .. } => "unipotent: I1 = l (fixed form), I2 = f(l) sin(2pi m/l)",
            Self::Momenta => "identity: I1 = p_x, I2 = p_y",
        }
    }

    pub fn i1(&self, px: f64, py: f64) -> f64 {
        match *self {
            Self::Hyperbolic { cross, square, .. } => px * px + cross * px * py + square * py * py,
            Self::Unipotent { invariant: w, .. } => w[0] * px + w[1] * py,
            Self::Momenta => px,
        }
    }

    /// Argument of the sine in `I2`; `None` where `I2` is defined as 0.
    fn phase(&self, px: f64, py: f64) -> Option<f64> {
        match *self {
            Self::Hyperbolic { stable, log_lambda, angular, .. } => {
                let ls = px + stable * py;
                (ls != 0.0).then(|| angular * ls.abs().ln() / log_lambda)
            }
            Self::Unipotent { invariant: w, shifting: r, angular } => {
                let l = w[0] * px + w[1] * py;
                (l != 0.0).then(|| angular * (r[0] * px + r[1] * py) / l)
            }
            Self::Momenta => None,
        }
    }

    pub fn i2(&self, px: f64, py: f64) -> f64 {
        self.i2_rescaled(px, py, 0.0)
    }

    /// `I2 * exp(-log_scale)`, with the flat factor's exponent combined before
    /// exponentiating so that small `I1` does not underflow.
    pub fn i2_rescaled(&self, px: f64, py: f64, log_scale: f64) -> f64 {
        if let Self::Momenta = self {
            return py * (-log_scale).exp();
        }
        let u = self.i1(px, py);
        match self.phase(px, py) {
            Some(theta) if u != 0.0 => (-1.0 / (u * u) - log_scale).exp() * theta.sin(),
            _ => 0.0,
        }
    }

    /// `ln f(I1)`, the exponent of the flat factor, where it is finite.
    pub fn flat_exponent(&self, px: f64, py: f64) -> Option<f64> {
        if let Self::Momenta = self {
            return None;
        }
        let u = self.i1(px, py);
        (u != 0.0).then(|| -1.0 / (u * u))
    }

    /// `f(I1)`, the envelope bounding `|I2|`.
    pub fn envelope(&self, px: f64, py: f64) -> f64 {
        match self {
            Self::Momenta => f64::INFINITY,
            _ => flat(self.i1(px, py)),
        }
    }
}

/// `I1` for the cat map: `p_x^2 - p_x p_y - p_y^2`.
pub fn eval_i1(px: f64, py: f64) -> f64 {
    px * px - px * py - py * py
}

/// `I2` for the cat map.
pub fn eval_i2(px: f64, py: f64) -> f64 {
    QuotientIntegrals::cat().i2(px, py)
}

/// All six integrals at a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralValues {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
}

pub fn eval_all(s: &CoverState, metric: &MetricFamily, integrals: &QuotientIntegrals) -> IntegralValues {
    let h = hamiltonian(s, metric);
    IntegralValues {
        f1: s.px,
        f2: s.py,
        f3: h,
        i1: integrals.i1(s.px, s.py),
        i2: integrals.i2(s.px, s.py),
        i3: h,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketConfig {
    pub fd_step: f64,
    pub tolerance: f64,
}

impl Default for BracketConfig {
    fn default() -> Self {
        Self { fd_step: 1e-5, tolerance: 1e-6 }
    }
}

impl BracketConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fd_step > 0.0 && self.fd_step < 1e-2) {
            return Err(Error::InvalidConfig(format!("fd_step = {} outside (0, 1e-2)", self.fd_step)));
        }
        Ok(())
    }
}

/// Values of `f` at `s -+ h e_j` for each of the six coordinates.
fn stencil<F: Fn(&CoverState) -> f64>(f: &F, s: &CoverState, h: f64) -> [[f64; 2]; 6] {
    let base = s.to_array();
    let mut out = [[0.0; 2]; 6];
    for (j, pair) in out.iter_mut().enumerate() {
        let mut lo = base;
        let mut hi = base;
        lo[j] -= h;
        hi[j] += h;
        *pair = [f(&CoverState::from_array(lo)), f(&CoverState::from_array(hi))];
    }
    out
}

fn central_gradient<F: Fn(&CoverState) -> f64>(f: &F, s: &CoverState, h: f64) -> [f64; 6] {
    stencil(f, s, h).map(|[lo, hi]| (hi - lo) / (2.0 * h))
}

/// Canonical bracket `sum_j (df/dq_j dg/dp_j - df/dp_j dg/dq_j)` for
/// `omega = sum dq_j ^ dp_j`, `q = (x, y, z)`, by central differences.
pub fn poisson_bracket<F, G>(f: F, g: G, s: &CoverState, cfg: &BracketConfig) -> f64
where
    F: Fn(&CoverState) -> f64,
    G: Fn(&CoverState) -> f64,
{
    let df = central_gradient(&f, s, cfg.fd_step);
    let dg = central_gradient(&g, s, cfg.fd_step);
    (0..3).map(|j| df[j] * dg[j + 3] - df[j + 3] * dg[j]).sum()
}

const RANK_THRESHOLD: f64 = 1e-8;
/// Largest growth of the flat factor across the stencil for which the
/// rescaled difference quotient is still trusted.
const MAX_STENCIL_EXPONENT: f64 = 50.0;

/// Numerical rank of the Jacobian of `(I1, I2, I3)` at `s`.
///
/// Each row is divided by a positive constant (rank-preserving) before the
/// singular values are compared against `1e-8`: the `I2` row by `f(I1(s))`,
/// then every row by its norm.
pub fn independence_rank(s: &CoverState, metric: &MetricFamily) -> Result<usize> {
    let integrals = QuotientIntegrals::for_matrix(metric.gluing())?;
    Ok(independence_rank_with(s, metric, &integrals, &BracketConfig::default()))
}

pub fn independence_rank_with(
    s: &CoverState,
    metric: &MetricFamily,
    integrals: &QuotientIntegrals,
    cfg: &BracketConfig,
) -> usize {
    let h = cfg.fd_step;
    let i1 = |q: &CoverState| integrals.i1(q.px, q.py);
    let energy = |q: &CoverState| hamiltonian(q, metric);
    let g1 = central_gradient(&i1, s, h);
    let g3 = central_gradient(&energy, s, h);

    let unscaled = |q: &CoverState| integrals.i2(q.px, q.py);
    let g2 = match integrals.flat_exponent(s.px, s.py) {
        Some(centre) => {
            let exponents = stencil(&|q: &CoverState| integrals.flat_exponent(q.px, q.py).unwrap_or(f64::NEG_INFINITY), s, h);
            let resolved = exponents.iter().flatten().all(|e| e - centre <= MAX_STENCIL_EXPONENT);
            if resolved {
                central_gradient(&|q: &CoverState| integrals.i2_rescaled(q.px, q.py, centre), s, h)
            } else {
                central_gradient(&unscaled, s, h)
            }
        }
        None => central_gradient(&unscaled, s, h),
    };

    let mut jac = SMatrix::<f64, 3, 6>::zeros();
    for (r, row) in [g1, g2, g3].iter().enumerate() {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 && norm.is_finite() {
            for (c, v) in row.iter().enumerate() {
                jac[(r, c)] = v / norm;
            }
        }
    }
    jac.svd(false, false)
        .singular_values
        .iter()
        .filter(|&&sv| sv > RANK_THRESHOLD)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::deck_apply;

    const PHI: f64 = 1.618_033_988_749_895;

    #[test]
    fn i1_examples() {
        assert_eq!(eval_i1(1.0, 0.0), 1.0);
        assert_eq!(eval_i1(1.0, -1.0), 1.0);
        assert!(eval_i1(PHI, 1.0).abs() < 1e-15);
        let q = QuotientIntegrals::cat();
        for (px, py) in [(0.3, -0.7), (1.2, 0.4), (-2.0, 1.5)] {
            let factored = (px - PHI * py) * (px - (1.0 - PHI) * py);
            assert!((q.i1(px, py) - factored).abs() < 1e-14);
            assert_eq!(q.i1(px, py), eval_i1(px, py));
        }
    }

    #[test]
    fn i2_examples() {
        assert_eq!(eval_i2(0.0, 0.0), 0.0);
        assert_eq!(eval_i2(1.0, 0.0), 0.0);
        assert!((eval_i2(1.0, -1.0) - eval_i2(1.0, 0.0)).abs() < 1e-15);
        // eigen-direction: l_s = 0 and I1 = 0
        assert_eq!(eval_i2(PHI, 1.0), 0.0);
    }

    #[test]
    fn cat_integrals_coefficients() {
        match QuotientIntegrals::cat() {
            QuotientIntegrals::Hyperbolic { cross, square, stable, log_lambda, angular } => {
                assert_eq!((cross, square), (-1.0, -1.0));
                assert!((stable + PHI).abs() < 1e-15);
                assert!((log_lambda - 0.962_423_650_119_206_9).abs() < 1e-15);
                assert_eq!(angular, TAU);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unipotent_integrals_for_shear() {
        let q = QuotientIntegrals::for_matrix(&GluingMatrix::shear()).unwrap();
        assert_eq!(
            q,
            QuotientIntegrals::Unipotent { invariant: [1.0, 0.0], shifting: [0.0, 1.0], angular: TAU }
        );
        let lower: GluingMatrix = "1,0,3,1".parse().unwrap();
        let q = QuotientIntegrals::for_matrix(&lower).unwrap();
        let a = lower.inverse_transpose();
        for (px, py) in [(0.4, 0.9), (-0.7, 0.2), (1.1, -1.3)] {
            let (qx, qy) = a.apply(px, py);
            assert!((q.i1(qx, qy) - q.i1(px, py)).abs() < 1e-15);
            assert!((q.i2(qx, qy) - q.i2(px, py)).abs() < 1e-12);
        }
        assert_eq!(QuotientIntegrals::for_matrix(&GluingMatrix::identity()).unwrap(), QuotientIntegrals::Momenta);
        assert!(QuotientIntegrals::for_matrix(&"0,-1,1,0".parse().unwrap()).is_err());
    }

    #[test]
    fn envelope_bound() {
        let q = QuotientIntegrals::cat();
        for i in 0..200 {
            let px = -2.0 + 0.02 * i as f64;
            let py = 1.3 - 0.013 * i as f64;
            assert!(q.i2(px, py).abs() <= q.envelope(px, py));
        }
    }

    #[test]
    fn eval_all_on_vertical_and_after_deck() {
        let m = MetricFamily::new(GluingMatrix::cat()).unwrap();
        let q = QuotientIntegrals::cat();
        let v = eval_all(&CoverState::new(0.2, 0.4, 1.7, 0.0, 0.0, 1.0), &m, &q);
        assert_eq!((v.f3, v.i1, v.i2, v.i3), (0.5, 0.0, 0.0, 0.5));

        let s = CoverState::new(0.2, 0.4, 0.3, 0.9, -0.4, 0.3);
        let a = eval_all(&s, &m, &q);
        let b = eval_all(&deck_apply(&s, m.gluing(), 1), &m, &q);
        assert!((a.i1 - b.i1).abs() < 1e-12);
        assert!((a.i2 - b.i2).abs() < 1e-12);
        assert!((a.i3 - b.i3).abs() < 1e-12);
        assert_eq!((b.f1, b.f2), (a.f1 - a.f2, -a.f1 + 2.0 * a.f2));
    }

    #[test]
    fn bracket_sanity() {
        let cfg = BracketConfig::default();
        let s = CoverState::new(0.3, 0.6, 0.2, 0.5, -0.25, 0.8);
        let x = |q: &CoverState| q.x;
        let px = |q: &CoverState| q.px;
        let py = |q: &CoverState| q.py;
        assert!((poisson_bracket(x, px, &s, &cfg) - 1.0).abs() < 1e-8);
        assert!(poisson_bracket(px, py, &s, &cfg).abs() < 1e-10);

        let m = MetricFamily::new(GluingMatrix::cat()).unwrap();
        let h = |q: &CoverState| hamiltonian(q, &m);
        let z = |q: &CoverState| q.z;
        // {z, H} = dH/dp_z = p_z
        assert!((poisson_bracket(z, h, &s, &cfg) - s.pz).abs() < 1e-8);
        let fw = poisson_bracket(z, h, &s, &cfg);
        let bw = poisson_bracket(h, z, &s, &cfg);
        assert!((fw + bw).abs() < 1e-14);
    }

    #[test]
    fn bracket_config_validation() {
        assert!(BracketConfig::default().validate().is_ok());
        assert!(BracketConfig { fd_step: 0.5, tolerance: 1e-6 }.validate().is_err());
        assert!(BracketConfig { fd_step: 0.0, tolerance: 1e-6 }.validate().is_err());
    }

    #[test]
    fn rank_examples() {
        let m = MetricFamily::new(GluingMatrix::cat()).unwrap();
        // I1 = 0.5 with px = 1/sqrt(2), py = 0 at z = 0; then pz from H = 1
        let px = 0.5f64.sqrt();
        let pz = (2.0 - px * px).sqrt();
        let s = CoverState::new(0.1, 0.2, 0.0, px, 0.0, pz);
        assert!((eval_i1(px, 0.0) - 0.5).abs() < 1e-15);
        assert!((hamiltonian(&s, &m) - 1.0).abs() < 1e-15);
        assert_eq!(independence_rank(&s, &m).unwrap(), 3);

        let vertical = CoverState::new(0.1, 0.2, 0.4, 0.0, 0.0, 1.0);
        assert_eq!(independence_rank(&vertical, &m).unwrap(), 1);

        // on the null cone of I1 (an eigen-direction)
        let on_null = CoverState::new(0.1, 0.2, 0.4, PHI * 0.6, 0.6, 0.5);
        assert!(eval_i1(on_null.px, on_null.py).abs() < 1e-15);
        assert!(independence_rank(&on_null, &m).unwrap() <= 2);
    }
}
