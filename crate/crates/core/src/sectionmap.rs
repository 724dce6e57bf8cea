//! The invariant torus `N = {z = 0, p_x = p_y = 0, p_z = 1}`, the flow's
//! return map on it, and Lyapunov/entropy estimates for torus automorphisms.
//!
//! Orientation: the deck map identifies `(X, 0)` with `(C X, 1)`. The vertical
//! geodesic through `(X, 0)` reaches `(X, 1)` at `t = 1`, which is the point
//! `(C^{-1} X, 0)` of the fundamental domain. So the time-1 map on `N`, read
//! in the `z = 0` chart, is `C^{-1}`; the time-(-1) map is `C`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::flow::{deck_apply, step, unit_mod, CoverState, IntegratorConfig, QuotientState};
use crate::solmetric::{GluingMatrix, MetricFamily};

/// A point of `T^2 = R^2 / Z^2` with coordinates in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPoint {
    x: f64,
    y: f64,
}

impl TorusPoint {
    /// Reduces both coordinates mod 1.
    pub fn new(x: f64, y: f64) -> Self {
        Self { x: unit_mod(x), y: unit_mod(y) }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// The point of `N` over `(x, y)`.
    pub fn lift(&self) -> CoverState {
        CoverState::new(self.x, self.y, 0.0, 0.0, 0.0, 1.0)
    }
}

fn circle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Sup metric on the torus: `max_i min(|u_i - v_i|, 1 - |u_i - v_i|)`.
pub fn torus_distance(a: &TorusPoint, b: &TorusPoint) -> f64 {
    circle_gap(a.x, b.x).max(circle_gap(a.y, b.y))
}

/// `C q mod 1`.
pub fn cat_map(q: &TorusPoint, gluing: &GluingMatrix) -> TorusPoint {
    let (x, y) = gluing.apply(q.x, q.y);
    TorusPoint::new(x, y)
}

/// Where a trajectory first meets the section `{z in Z}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionCrossing {
    pub time: f64,
    /// The integer level crossed.
    pub level: i64,
    /// Cover state at the crossing, with `z` set to `level`.
    pub cover: CoverState,
    /// The crossing moved back to `z = 0` by the deck power `-level`, before
    /// any reduction mod 1.
    pub lifted: CoverState,
}

impl SectionCrossing {
    pub fn quotient(&self, gluing: &GluingMatrix) -> QuotientState {
        crate::flow::normalize(&self.lifted, gluing)
    }
}

/// Integrates until `z` crosses an integer level different from the start,
/// then solves for the crossing inside the last step by bisection on a
/// shortened step.
pub fn first_return(
    s0: &CoverState,
    metric: &MetricFamily,
    cfg: &IntegratorConfig,
    max_time: f64,
) -> Result<SectionCrossing> {
    cfg.validate()?;
    if !s0.is_finite() {
        return Err(Error::NonFiniteState(format!("{s0:?}")));
    }
    let mut cell = s0.z.floor();
    if s0.z == cell && s0.pz < 0.0 {
        cell -= 1.0;
    }
    let max_steps = (max_time / cfg.dt).ceil() as usize;
    let mut s = *s0;
    for n in 0..max_steps {
        let next = step(&s, metric, cfg);
        if next.z.floor() != cell {
            let level = if next.z > s.z { cell + 1.0 } else { cell };
            let tau = solve_crossing(&s, metric, cfg, level);
            let mut cover = step(&s, metric, &IntegratorConfig { dt: tau, ..*cfg });
            cover.z = level;
            let level = level as i64;
            let lifted = deck_apply(&cover, metric.gluing(), -level);
            return Ok(SectionCrossing {
                time: n as f64 * cfg.dt + tau,
                level,
                cover,
                lifted: CoverState { z: 0.0, ..lifted },
            });
        }
        s = next;
    }
    Err(Error::NoReturn(max_time))
}

/// Step length `tau in (0, dt]` with `z(step(s, tau)) = level`.
fn solve_crossing(s: &CoverState, metric: &MetricFamily, cfg: &IntegratorConfig, level: f64) -> f64 {
    let gap = |tau: f64| {
        if tau == 0.0 {
            s.z - level
        } else {
            step(s, metric, &IntegratorConfig { dt: tau, ..*cfg }).z - level
        }
    };
    let (mut lo, mut hi) = (0.0, cfg.dt);
    let below = gap(lo) < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (gap(mid) < 0.0) == below {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // the returned step must land on or past the level
    hi
}

/// Return map on `N` with its crossing time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionReturn {
    pub point: TorusPoint,
    pub crossing_time: f64,
}

/// Flow `q` on `N` until it next meets `z in Z`, bring it back to `z = 0`, and
/// project to the torus.
pub fn return_map_detailed(q: &TorusPoint, metric: &MetricFamily, cfg: &IntegratorConfig) -> Result<SectionReturn> {
    let crossing = first_return(&q.lift(), metric, cfg, 2.0)?;
    let s = crossing.quotient(metric.gluing()).into_inner();
    Ok(SectionReturn { point: TorusPoint::new(s.x, s.y), crossing_time: crossing.time })
}

pub fn return_map(q: &TorusPoint, metric: &MetricFamily, cfg: &IntegratorConfig) -> Result<TorusPoint> {
    Ok(return_map_detailed(q, metric, cfg)?.point)
}

/// A map of the torus with a tangent action, for Lyapunov estimation.
pub trait TorusMap {
    fn image(&self, q: &TorusPoint) -> Result<TorusPoint>;
    /// Differential at `q` applied to `v`.
    fn push_tangent(&self, q: &TorusPoint, v: [f64; 2]) -> Result<[f64; 2]>;
}

/// The linear automorphism `q -> C q`, differential `C`.
#[derive(Debug, Clone, Copy)]
pub struct Automorphism(pub GluingMatrix);

impl TorusMap for Automorphism {
    fn image(&self, q: &TorusPoint) -> Result<TorusPoint> {
        Ok(cat_map(q, &self.0))
    }

    fn push_tangent(&self, _q: &TorusPoint, v: [f64; 2]) -> Result<[f64; 2]> {
        let (a, b) = self.0.apply(v[0], v[1]);
        Ok([a, b])
    }
}

/// The flow's return map on `N`, differentiated by central differences of
/// the unreduced lift.
#[derive(Debug, Clone)]
pub struct FlowReturnMap<'a> {
    pub metric: &'a MetricFamily,
    pub cfg: IntegratorConfig,
    pub fd_step: f64,
}

impl FlowReturnMap<'_> {
    fn lifted(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let s = CoverState::new(x, y, 0.0, 0.0, 0.0, 1.0);
        let c = first_return(&s, self.metric, &self.cfg, 2.0)?;
        Ok((c.lifted.x, c.lifted.y))
    }
}

impl TorusMap for FlowReturnMap<'_> {
    fn image(&self, q: &TorusPoint) -> Result<TorusPoint> {
        return_map(q, self.metric, &self.cfg)
    }

    fn push_tangent(&self, q: &TorusPoint, v: [f64; 2]) -> Result<[f64; 2]> {
        let h = self.fd_step;
        let hi = self.lifted(q.x + h * v[0], q.y + h * v[1])?;
        let lo = self.lifted(q.x - h * v[0], q.y - h * v[1])?;
        Ok([(hi.0 - lo.0) / (2.0 * h), (hi.1 - lo.1) / (2.0 * h)])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovEstimate {
    pub top_exponent: f64,
    pub iterations: usize,
    pub per_orbit: Vec<f64>,
}

pub const LYAPUNOV_ORBITS: usize = 8;

/// Top Lyapunov exponent by tangent-vector renormalization along orbits whose
/// starting points are drawn from Lebesgue measure on the torus.
pub fn lyapunov_along<M: TorusMap>(
    map: &M,
    iterations: usize,
    orbits: usize,
    seed: u64,
) -> Result<LyapunovEstimate> {
    if iterations == 0 || orbits == 0 {
        return Err(Error::Precondition("need at least one orbit and one iteration".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_orbit = Vec::with_capacity(orbits);
    for _ in 0..orbits {
        let mut q = TorusPoint::new(rng.gen::<f64>(), rng.gen::<f64>());
        let angle = rng.gen::<f64>() * std::f64::consts::TAU;
        let mut v = [angle.cos(), angle.sin()];
        let mut log_growth = 0.0;
        for _ in 0..iterations {
            let w = map.push_tangent(&q, v)?;
            let before = v[0].hypot(v[1]);
            let after = w[0].hypot(w[1]);
            log_growth += after.ln() - before.ln();
            v = [w[0] / after, w[1] / after];
            q = map.image(&q)?;
        }
        per_orbit.push(log_growth / iterations as f64);
    }
    let top_exponent = per_orbit.iter().sum::<f64>() / orbits as f64;
    Ok(LyapunovEstimate { top_exponent, iterations, per_orbit })
}

/// Top Lyapunov exponent of `q -> C q` on the torus.
pub fn lyapunov_top(gluing: &GluingMatrix, iterations: usize, seed: u64) -> Result<LyapunovEstimate> {
    if iterations < 100 {
        return Err(Error::Precondition(format!("iterations = {iterations} < 100")));
    }
    lyapunov_along(&Automorphism(*gluing), iterations, LYAPUNOV_ORBITS, seed)
}

/// `max(0, ln rho(C))`: the Lebesgue-measure entropy of the torus
/// automorphism, hence a lower bound for the topological entropy of the
/// geodesic flow, which contains it on `N`.
pub fn entropy_lower_bound(gluing: &GluingMatrix) -> f64 {
    gluing.spectral_radius().ln().max(0.0)
}

/// Period of the rational point `(a, b) / den` under `q -> C q`, computed
/// exactly mod `den`.
pub fn rational_period(gluing: &GluingMatrix, point: [i64; 2], den: i64) -> usize {
    let [[c11, c12], [c21, c22]] = gluing.entries();
    let reduce = |v: i64| v.rem_euclid(den);
    let start = [reduce(point[0]), reduce(point[1])];
    let mut cur = start;
    let mut n = 0;
    loop {
        cur = [reduce(c11 * cur[0] + c12 * cur[1]), reduce(c21 * cur[0] + c22 * cur[1])];
        n += 1;
        if cur == start {
            return n;
        }
    }
}

/// Multiplicative order of `C` in `GL(2, Z/m)`.
pub fn matrix_order_mod(gluing: &GluingMatrix, m: i64) -> usize {
    let c = gluing.entries().map(|row| row.map(|v| v.rem_euclid(m)));
    let mul = |a: [[i64; 2]; 2], b: [[i64; 2]; 2]| {
        let mut out = [[0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = (a[i][0] * b[0][j] + a[i][1] * b[1][j]).rem_euclid(m);
            }
        }
        out
    };
    let id = [[1 % m, 0], [0, 1 % m]];
    let mut p = c;
    let mut n = 1;
    while p != id {
        p = mul(p, c);
        n += 1;
    }
    n
}
