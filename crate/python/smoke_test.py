"""Smoke test for the solflow extension module.

Build it first:  cd crates/py && maturin develop --release
"""
import math

import solflow


def main():
    a = solflow.GluingMatrix.cat()
    b = solflow.GluingMatrix.parse("1,1,0,1")
    fam = solflow.MetricFamily(a)

    g = fam.metric_at(1.0)
    assert max(abs(g[0][0] - 2), abs(g[0][1] + 3), abs(g[1][1] - 5)) < 1e-12, g
    assert fam.deck_invariance_defect(-2.5) < 1e-12

    s0 = (0.3, 0.1, 0.2, 0.4, -0.7, 0.5)
    h0 = fam.hamiltonian(s0)
    times, states = fam.integrate(s0, 10.0, sample_every=100)
    assert times[-1] == 10.0
    assert all(s[3] == s0[3] and s[4] == s0[4] for s in states)
    drift = max(abs(fam.hamiltonian(s) - h0) / h0 for s in states)
    assert drift < 1e-6, drift

    moved = solflow.deck_apply(s0, a, 1)
    assert moved[3] == s0[3] - s0[4]
    i1, i2 = fam.quotient_integrals(*s0[3:5])
    assert abs(i1 - solflow.eval_i1(*moved[3:5])) < 1e-12
    assert abs(i2 - solflow.eval_i2(*moved[3:5])) < 1e-12
    assert fam.independence_rank(s0) == 3

    x1, y1, t = fam.return_map(0.25, 0.5)
    print(f"return map (0.25, 0.5) -> ({x1:.6f}, {y1:.6f}) at t = {t:.15f}")
    print(f"A q = {solflow.cat_map(0.25, 0.5, a)}")

    top, _ = solflow.lyapunov_top(a, 10_000, 42)
    target = math.log((3 + math.sqrt(5)) / 2)
    assert abs(top - target) / target < 0.01, top
    assert solflow.lyapunov_top(b)[0] < 0.01

    counts = solflow.growth_function(a, 12)
    assert all(counts[2 * k] >= 2**k for k in range(7))
    assert solflow.growth_rate(a, 12) >= 0.34
    assert solflow.check_relations(a) == (True, True, True)
    assert solflow.certificate_collisions(a, 10) == 0

    try:
        solflow.MetricFamily(solflow.GluingMatrix(0, -1, 1, 0))
    except ValueError as e:
        print(f"rotation rejected: {e}")
    else:
        raise AssertionError("rotation accepted")

    print("smoke test ok")


if __name__ == "__main__":
    main()
