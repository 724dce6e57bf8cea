//! Geodesic flow on the cotangent bundle of the cylinder `T^2 x R`.
//!
//! The Hamiltonian `H = (p_z^2 + p^T G(z)^{-1} p) / 2` does not depend on
//! `x, y`, so the fiber momenta `p = (p_x, p_y)` are constants of motion. With
//! `p` frozen, `(z, p_z)` is a one-degree-of-freedom mechanical system with
//! potential `V(z) = p^T G(z)^{-1} p / 2`, and `(x, y)` are obtained by
//! quadrature. The leapfrog scheme integrates exactly this reduced system and
//! never writes `p_x, p_y`.

use std::io::{self, Write};

use nalgebra::Vector2;

use crate::error::{Error, Result};
use crate::integrals::QuotientIntegrals;
use crate::solmetric::{GluingMatrix, MetricFamily};

/// A covector `(x, y, z; p_x, p_y, p_z)` on the cylinder.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoverState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub px: f64,
    pub py: f64,
    pub pz: f64,
}

impl CoverState {
    pub fn new(x: f64, y: f64, z: f64, px: f64, py: f64, pz: f64) -> Self {
        Self { x, y, z, px, py, pz }
    }

    /// `(x, y, z, p_x, p_y, p_z)`.
    pub fn to_array(self) -> [f64; 6] {
        [self.x, self.y, self.z, self.px, self.py, self.pz]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4], a[5])
    }

    pub fn fiber_momentum(&self) -> Vector2<f64> {
        Vector2::new(self.px, self.py)
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Same point, all momenta negated.
    pub fn reversed(self) -> Self {
        Self { px: -self.px, py: -self.py, pz: -self.pz, ..self }
    }

    /// Euclidean distance in the six coordinates.
    pub fn distance(&self, other: &Self) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// A state in the fundamental domain `x, y, z in [0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuotientState(CoverState);

impl QuotientState {
    pub fn state(&self) -> &CoverState {
        &self.0
    }

    pub fn into_inner(self) -> CoverState {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Leapfrog,
    /// Classical RK4 on all six components. Reference only.
    Rk4Reference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub seed: u64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { dt: 1e-3, scheme: Scheme::Leapfrog, seed: 42 }
    }
}

impl IntegratorConfig {
    pub fn leapfrog(dt: f64) -> Self {
        Self { dt, ..Self::default() }
    }

    pub fn rk4(dt: f64) -> Self {
        Self { dt, scheme: Scheme::Rk4Reference, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= 0.1) {
            return Err(Error::InvalidConfig(format!("dt = {} outside (0, 0.1]", self.dt)));
        }
        Ok(())
    }
}

/// Values of the first integrals attached to a trajectory sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleIntegrals {
    pub h: f64,
    pub f1: f64,
    pub f2: f64,
    pub i1: f64,
    pub i2: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<CoverState>,
    pub integrals: Vec<SampleIntegrals>,
}

pub const CSV_HEADER: &str = "t,x,y,z,px,py,pz,H,F1,F2,I1,I2";

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> Option<&CoverState> {
        self.states.last()
    }

    /// Largest deviation of each integral from its initial value, relative
    /// for `H`, absolute for the rest: `(H, F1, F2, I1, I2)`.
    pub fn max_drift(&self) -> SampleIntegrals {
        let mut out = SampleIntegrals { h: 0.0, f1: 0.0, f2: 0.0, i1: 0.0, i2: 0.0 };
        let Some(first) = self.integrals.first() else {
            return out;
        };
        for v in &self.integrals {
            let rel_h = if first.h != 0.0 { ((v.h - first.h) / first.h).abs() } else { v.h.abs() };
            out.h = out.h.max(rel_h);
            out.f1 = out.f1.max((v.f1 - first.f1).abs());
            out.f2 = out.f2.max((v.f2 - first.f2).abs());
            out.i1 = out.i1.max((v.i1 - first.i1).abs());
            out.i2 = out.i2.max((v.i2 - first.i2).abs());
        }
        out
    }

    /// One row per sample, every value at 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for ((t, s), v) in self.times.iter().zip(&self.states).zip(&self.integrals) {
            let row = [*t, s.x, s.y, s.z, s.px, s.py, s.pz, v.h, v.f1, v.f2, v.i1, v.i2];
            let cells: Vec<String> = row.iter().map(|c| format!("{c:.16e}")).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// `H = (p_z^2 + p^T G(z)^{-1} p) / 2`.
pub fn hamiltonian(s: &CoverState, metric: &MetricFamily) -> f64 {
    0.5 * (s.pz * s.pz + metric.co_norm_sq(s.z, &s.fiber_momentum()))
}

/// `dV/dz` for the reduced potential `V(z) = p^T G(z)^{-1} p / 2`.
#[inline]
fn potential_slope(metric: &MetricFamily, z: f64, p: &Vector2<f64>) -> f64 {
    0.5 * (p.transpose() * metric.d_co_metric_at(z) * p)[(0, 0)]
}

/// Hamilton's equations `(x', y', z', p_x', p_y', p_z')`.
pub fn vector_field(s: &CoverState, metric: &MetricFamily) -> [f64; 6] {
    let p = s.fiber_momentum();
    let v = metric.co_metric_at(s.z) * p;
    [v.x, v.y, s.pz, 0.0, 0.0, -potential_slope(metric, s.z, &p)]
}

/// One step of the configured scheme.
pub fn step(s: &CoverState, metric: &MetricFamily, cfg: &IntegratorConfig) -> CoverState {
    match cfg.scheme {
        Scheme::Leapfrog => leapfrog_step(s, metric, cfg.dt),
        Scheme::Rk4Reference => rk4_step(s, metric, cfg.dt),
    }
}

/// Kick-drift-kick on `(z, p_z)`; `(x, y)` advance by the midpoint rule at
/// the centre of the drift.
pub(crate) fn leapfrog_step(s: &CoverState, metric: &MetricFamily, dt: f64) -> CoverState {
    let p = s.fiber_momentum();
    let half = 0.5 * dt;
    let pz_half = s.pz - half * potential_slope(metric, s.z, &p);
    let z_mid = s.z + half * pz_half;
    let z_new = s.z + dt * pz_half;
    let v = metric.co_metric_at(z_mid) * p;
    let pz_new = pz_half - half * potential_slope(metric, z_new, &p);
    CoverState {
        x: s.x + dt * v.x,
        y: s.y + dt * v.y,
        z: z_new,
        px: s.px,
        py: s.py,
        pz: pz_new,
    }
}

fn rk4_step(s: &CoverState, metric: &MetricFamily, dt: f64) -> CoverState {
    let y0 = s.to_array();
    let shifted = |k: &[f64; 6], c: f64| {
        let mut out = y0;
        for (o, ki) in out.iter_mut().zip(k) {
            *o += c * ki;
        }
        CoverState::from_array(out)
    };
    let k1 = vector_field(s, metric);
    let k2 = vector_field(&shifted(&k1, dt / 2.0), metric);
    let k3 = vector_field(&shifted(&k2, dt / 2.0), metric);
    let k4 = vector_field(&shifted(&k3, dt), metric);
    let mut out = y0;
    for i in 0..6 {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    CoverState::from_array(out)
}

/// Integrates from `t = 0` to `t_final`, recording every `sample_every`-th
/// step plus the final one.
///
/// The step count is `ceil(t_final / dt)` and the step is shrunk to land on
/// `t_final` exactly.
pub fn integrate(
    s0: &CoverState,
    metric: &MetricFamily,
    cfg: &IntegratorConfig,
    t_final: f64,
    sample_every: usize,
) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    if !s0.is_finite() {
        return Err(Error::NonFiniteState(format!("{s0:?}")));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::Precondition(format!("t_final = {t_final} must be finite and >= 0")));
    }
    if sample_every == 0 {
        return Err(Error::Precondition("sample_every must be >= 1".into()));
    }
    let n_steps = if t_final == 0.0 {
        0
    } else {
        ((t_final / cfg.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
    };
    let h = if n_steps == 0 { cfg.dt } else { t_final / n_steps as f64 };
    let step_cfg = IntegratorConfig { dt: h, ..*cfg };
    let integrals = QuotientIntegrals::for_matrix(metric.gluing())?;

    let capacity = n_steps / sample_every + 2;
    let mut rec = TrajectoryRecord {
        times: Vec::with_capacity(capacity),
        states: Vec::with_capacity(capacity),
        integrals: Vec::with_capacity(capacity),
    };
    let mut push = |t: f64, s: &CoverState| {
        rec.times.push(t);
        rec.states.push(*s);
        rec.integrals.push(SampleIntegrals {
            h: hamiltonian(s, metric),
            f1: s.px,
            f2: s.py,
            i1: integrals.i1(s.px, s.py),
            i2: integrals.i2(s.px, s.py),
        });
    };

    let mut s = *s0;
    push(0.0, &s);
    for n in 1..=n_steps {
        s = step(&s, metric, &step_cfg);
        if n % sample_every == 0 || n == n_steps {
            let t = if n == n_steps { t_final } else { n as f64 * h };
            push(t, &s);
        }
    }
    Ok(rec)
}

/// Applies the `k`-th power of the deck map
/// `(X, z; p, p_z) -> (C X, z + 1; C^{-T} p, p_z)`.
pub fn deck_apply(s: &CoverState, gluing: &GluingMatrix, k: i64) -> CoverState {
    let (pos, mom) = if k >= 0 {
        (*gluing, gluing.inverse_transpose())
    } else {
        (gluing.inverse(), gluing.transpose())
    };
    let mut out = *s;
    for _ in 0..k.unsigned_abs() {
        (out.x, out.y) = pos.apply(out.x, out.y);
        (out.px, out.py) = mom.apply(out.px, out.py);
    }
    out.z = s.z + k as f64;
    out
}

/// `v mod 1` in `[0, 1)`.
#[inline]
pub(crate) fn unit_mod(v: f64) -> f64 {
    let r = v.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Moves a state into the fundamental domain: deck power `-floor(z)`, then
/// `x, y` reduced mod 1 (the fiber translations act trivially on momenta).
pub fn normalize(s: &CoverState, gluing: &GluingMatrix) -> QuotientState {
    let mut k = -(s.z.floor() as i64);
    // z + k can round up to exactly 1 for z just below an integer
    if s.z + k as f64 >= 1.0 {
        k -= 1;
    }
    let mut out = deck_apply(s, gluing, k);
    out.z = out.z.clamp(0.0, 1.0);
    if out.z >= 1.0 {
        out.z = 0.0;
    }
    out.x = unit_mod(out.x);
    out.y = unit_mod(out.y);
    QuotientState(out)
}
