mod common;

use proptest::prelude::*;

use common::{bracket_oracle, hamiltonian_oracle, A, B};
use solflow::flow::deck_apply;
use solflow::integrals::{independence_rank_with, poisson_bracket, BracketConfig};
use solflow::{CoverState, GluingMatrix, MetricFamily, QuotientIntegrals};

fn metric(c: [[i64; 2]; 2]) -> MetricFamily {
    MetricFamily::new(GluingMatrix::new(c).unwrap()).unwrap()
}

fn momenta() -> impl Strategy<Value = (f64, f64)> {
    (-3.0..3.0f64, -3.0..3.0f64)
}

proptest! {
    #[test]
    fn hyperbolic_integrals_deck_invariant((px, py) in momenta(), k in -3i64..=3) {
        let g = GluingMatrix::cat();
        let ints = QuotientIntegrals::cat();
        let s = CoverState::new(0.5, 0.5, 0.5, px, py, 1.0);
        let t = deck_apply(&s, &g, k);
        let i1 = ints.i1(px, py);
        prop_assert!((ints.i1(t.px, t.py) - i1).abs() <= 1e-12 * i1.abs().max(1.0) * 10f64.powi(k.abs() as i32));
        prop_assert!((ints.i2(t.px, t.py) - ints.i2(px, py)).abs() <= 1e-10);
    }

    #[test]
    fn unipotent_integrals_deck_invariant((px, py) in momenta(), k in -3i64..=3) {
        let g = GluingMatrix::shear();
        let ints = QuotientIntegrals::for_matrix(&g).unwrap();
        let t = deck_apply(&CoverState::new(0.0, 0.0, 0.0, px, py, 1.0), &g, k);
        prop_assert_eq!(ints.i1(t.px, t.py), ints.i1(px, py));
        prop_assert!((ints.i2(t.px, t.py) - ints.i2(px, py)).abs() <= 1e-12);
    }

    #[test]
    fn bracket_agrees_with_oracle(
        (px, py) in momenta(), z in -1.0..1.0f64, pz in -1.0..1.0f64, x in 0.0..1.0f64, y in 0.0..1.0f64,
    ) {
        let m = metric(A);
        let cfg = BracketConfig::default();
        let s = CoverState::new(x, y, z, px, py, pz);
        let zf = |q: &CoverState| q.z * q.px;
        let h = |q: &CoverState| solflow::flow::hamiltonian(q, &m);
        let lib = poisson_bracket(zf, h, &s, &cfg);
        let oracle = bracket_oracle(|a| a[2] * a[3], |a| hamiltonian_oracle(A, a), s.to_array(), 1e-5);
        prop_assert!((lib - oracle).abs() <= 1e-6 * oracle.abs().max(1.0));
        prop_assert_eq!(poisson_bracket(h, zf, &s, &cfg), -lib);
    }
}

#[test]
fn canonical_brackets() {
    let cfg = BracketConfig::default();
    let s = CoverState::new(0.1, 0.2, 0.3, 0.4, 0.5, 0.6);
    let q = [|c: &CoverState| c.x, |c: &CoverState| c.y, |c: &CoverState| c.z];
    let p = [|c: &CoverState| c.px, |c: &CoverState| c.py, |c: &CoverState| c.pz];
    for (i, qi) in q.iter().enumerate() {
        for (j, pj) in p.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((poisson_bracket(qi, pj, &s, &cfg) - want).abs() < 1e-9);
        }
    }
}

#[test]
fn unipotent_integrals_are_independent_off_the_vertical() {
    let m = metric(B);
    let ints = QuotientIntegrals::for_matrix(m.gluing()).unwrap();
    let cfg = BracketConfig::default();
    let s = CoverState::new(0.2, 0.3, 0.1, 0.7, 0.2, 0.5);
    assert_eq!(independence_rank_with(&s, &m, &ints, &cfg), 3);
    let v = CoverState { px: 0.0, py: 0.0, ..s };
    assert!(independence_rank_with(&v, &m, &ints, &cfg) < 3);
}
