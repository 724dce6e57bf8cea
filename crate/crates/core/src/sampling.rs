//! Seeded sampling of covectors.

use rand::Rng;

use crate::flow::{hamiltonian, CoverState};
use crate::solmetric::MetricFamily;

/// Uniform direction in the unit ball of `R^3`, by rejection.
fn ball_direction<R: Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let v = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0f64),
        ];
        let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        if r2 > 1e-6 && r2 <= 1.0 {
            return v;
        }
    }
}

/// A covector over a uniform point of the fundamental domain with a uniform
/// momentum direction, scaled so that `H = energy`.
///
/// `energy = 0.5` is the unit covector bundle `|p|_g = 1`.
pub fn covector_with_energy<R: Rng>(rng: &mut R, metric: &MetricFamily, energy: f64) -> CoverState {
    let (x, y, z) = (rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>());
    let d = ball_direction(rng);
    let s = CoverState::new(x, y, z, d[0], d[1], d[2]);
    let scale = (energy / hamiltonian(&s, metric)).sqrt();
    CoverState { px: d[0] * scale, py: d[1] * scale, pz: d[2] * scale, ..s }
}

pub fn unit_covector<R: Rng>(rng: &mut R, metric: &MetricFamily) -> CoverState {
    covector_with_energy(rng, metric, 0.5)
}

/// Rejection-samples unit covectors until `accept` holds.
pub fn unit_covector_where<R: Rng, F: Fn(&CoverState) -> bool>(
    rng: &mut R,
    metric: &MetricFamily,
    energy: f64,
    accept: F,
) -> CoverState {
    loop {
        let s = covector_with_energy(rng, metric, energy);
        if accept(&s) {
            return s;
        }
    }
}
