//! Test-side oracles, written without the library's closed forms.
#![allow(dead_code)]

pub type M2 = [[f64; 2]; 2];

pub const A: [[i64; 2]; 2] = [[2, 1], [1, 1]];
pub const B: [[i64; 2]; 2] = [[1, 1], [0, 1]];

pub fn to_f(m: [[i64; 2]; 2]) -> M2 {
    m.map(|r| r.map(|v| v as f64))
}

pub fn mul(a: &M2, b: &M2) -> M2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

pub fn transpose(a: &M2) -> M2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

pub fn scale(a: &M2, s: f64) -> M2 {
    a.map(|r| r.map(|v| v * s))
}

pub fn max_abs_diff(a: &M2, b: &M2) -> f64 {
    (0..4).map(|k| (a[k / 2][k % 2] - b[k / 2][k % 2]).abs()).fold(0.0, f64::max)
}

/// Taylor series with scaling and squaring.
pub fn expm_series(m: &M2) -> M2 {
    let norm = m.iter().flatten().map(|v| v.abs()).sum::<f64>();
    let mut squarings = 0;
    let mut s = 1.0;
    while norm * s > 0.25 {
        s *= 0.5;
        squarings += 1;
    }
    let a = scale(m, s);
    let mut term = [[1.0, 0.0], [0.0, 1.0]];
    let mut sum = term;
    for k in 1..30 {
        term = scale(&mul(&term, &a), 1.0 / k as f64);
        for i in 0..2 {
            for j in 0..2 {
                sum[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        sum = mul(&sum, &sum);
    }
    sum
}

/// Logarithm by eigendecomposition (hyperbolic, positive eigenvalues) or
/// `log(I + N) = N` (unipotent).
pub fn log_oracle(c: [[i64; 2]; 2]) -> M2 {
    let m = to_f(c);
    let tr = m[0][0] + m[1][1];
    if c[0][0] + c[1][1] == 2 {
        return [[m[0][0] - 1.0, m[0][1]], [m[1][0], m[1][1] - 1.0]];
    }
    let disc = (tr * tr - 4.0).sqrt();
    let l1 = (tr + disc) / 2.0;
    let l2 = (tr - disc) / 2.0;
    // eigenvectors (c12, l - c11)
    let v = [[m[0][1], m[0][1]], [l1 - m[0][0], l2 - m[0][0]]];
    let det = v[0][0] * v[1][1] - v[0][1] * v[1][0];
    let vinv = [[v[1][1] / det, -v[0][1] / det], [-v[1][0] / det, v[0][0] / det]];
    let d = [[l1.ln(), 0.0], [0.0, l2.ln()]];
    mul(&mul(&v, &d), &vinv)
}

/// `g(z) = exp(-z G0^T) exp(-z G0)`.
pub fn metric_oracle(c: [[i64; 2]; 2], z: f64) -> M2 {
    let f = expm_series(&scale(&log_oracle(c), -z));
    mul(&transpose(&f), &f)
}

/// `g(z)^{-1} = exp(z G0) exp(z G0^T)`.
pub fn co_metric_oracle(c: [[i64; 2]; 2], z: f64) -> M2 {
    let e = expm_series(&scale(&log_oracle(c), z));
    mul(&e, &transpose(&e))
}

/// `H = (pz^2 + p^T W(z) p) / 2` at `[x, y, z, px, py, pz]`.
pub fn hamiltonian_oracle(c: [[i64; 2]; 2], s: [f64; 6]) -> f64 {
    let w = co_metric_oracle(c, s[2]);
    let (px, py) = (s[3], s[4]);
    0.5 * (s[5] * s[5] + w[0][0] * px * px + 2.0 * w[0][1] * px * py + w[1][1] * py * py)
}

/// Canonical bracket with `q = (x, y, z)`, `p = (px, py, pz)`, central
/// differences of step `h`.
pub fn bracket_oracle<F: Fn([f64; 6]) -> f64, G: Fn([f64; 6]) -> f64>(f: F, g: G, s: [f64; 6], h: f64) -> f64 {
    let grad = |u: &dyn Fn([f64; 6]) -> f64| {
        let mut d = [0.0; 6];
        for (j, dj) in d.iter_mut().enumerate() {
            let (mut lo, mut hi) = (s, s);
            lo[j] -= h;
            hi[j] += h;
            *dj = (u(hi) - u(lo)) / (2.0 * h);
        }
        d
    };
    let (df, dg) = (grad(&f), grad(&g));
    (0..3).map(|j| df[j] * dg[j + 3] - df[j + 3] * dg[j]).sum()
}

pub fn frac(v: f64) -> f64 {
    let r = v - v.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

pub fn torus_dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    let d = |u: f64, v: f64| {
        let t = frac(u - v);
        t.min(1.0 - t)
    };
    d(a.0, b.0).hypot(d(a.1, b.1))
}

/// `(v, n)(w, m) = (v + C^n w, n + m)` in `Z^2 x| Z`, with `C^n` by repeated
/// multiplication.
pub fn group_mul(c: [[i64; 2]; 2], g: ([i64; 2], i64), h: ([i64; 2], i64)) -> ([i64; 2], i64) {
    let inv = [[c[1][1] * det(c), -c[0][1] * det(c)], [-c[1][0] * det(c), c[0][0] * det(c)]];
    let step = if g.1 >= 0 { c } else { inv };
    let mut w = h.0;
    for _ in 0..g.1.unsigned_abs() {
        w = [step[0][0] * w[0] + step[0][1] * w[1], step[1][0] * w[0] + step[1][1] * w[1]];
    }
    ([g.0[0] + w[0], g.0[1] + w[1]], g.1 + h.1)
}

fn det(c: [[i64; 2]; 2]) -> i64 {
    c[0][0] * c[1][1] - c[0][1] * c[1][0]
}

pub fn group_inv(c: [[i64; 2]; 2], g: ([i64; 2], i64)) -> ([i64; 2], i64) {
    // g^{-1} = (-C^{-n} v, -n)
    let (w, _) = group_mul(c, ([0, 0], -g.1), (g.0, 0));
    ([-w[0], -w[1]], -g.1)
}
