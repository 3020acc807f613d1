//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use zermelo::randers::SecondOrderJet;
use zermelo::{NavigationData, Point2, RandersMetric, Tangent2};

pub const A: f64 = 0.8;
pub const B: f64 = 1.0;

pub fn quartic() -> NavigationData {
    NavigationData::quartic_current(A, B)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point in `[-3, 3] × [-1.25, 1.25]`.
pub fn random_point(r: &mut impl Rng) -> Point2 {
    Point2::new(r.gen_range(-3.0..3.0), r.gen_range(-1.25..=1.25))
}

/// Nonzero tangent vector with length in `[0.2, 2]`.
pub fn random_tangent(r: &mut impl Rng) -> Tangent2 {
    let phi: f64 = r.gen_range(0.0..std::f64::consts::TAU);
    let len: f64 = r.gen_range(0.2..2.0);
    Tangent2::new(len * phi.cos(), len * phi.sin())
}

/// Jet of `L = ½F²` from central differences of `F` alone, Richardson
/// extrapolated over steps `h` and `h/2`.
pub fn fd_jet(m: &RandersMetric, p: Point2, t: Tangent2) -> SecondOrderJet {
    let l = |z: [f64; 4]| {
        let f = m
            .evaluate(Point2::new(z[0], z[1]), Tangent2::new(z[2], z[3]))
            .expect("inside convex region");
        0.5 * f * f
    };
    let z0 = [p.x, p.y, t.u, t.v];
    let shift = |i: usize, a: f64, j: usize, b: f64| {
        let mut z = z0;
        z[i] += a;
        z[j] += b;
        z
    };
    let d1 = |i: usize, h: f64| (l(shift(i, h, i, 0.0)) - l(shift(i, -h, i, 0.0))) / (2.0 * h);
    let d2 = |i: usize, j: usize, h: f64| {
        if i == j {
            (l(shift(i, h, i, 0.0)) - 2.0 * l(z0) + l(shift(i, -h, i, 0.0))) / (h * h)
        } else {
            (l(shift(i, h, j, h)) - l(shift(i, h, j, -h)) - l(shift(i, -h, j, h))
                + l(shift(i, -h, j, -h)))
                / (4.0 * h * h)
        }
    };
    // fields vary on the scale of λ near the convexity boundary
    let h = (1e-2 * m.lambda(p)).min(2e-3);
    let r1 = |i: usize| (4.0 * d1(i, h / 2.0) - d1(i, h)) / 3.0;
    let r2 = |i: usize, j: usize| (4.0 * d2(i, j, h / 2.0) - d2(i, j, h)) / 3.0;
    SecondOrderJet {
        value: l(z0),
        l_x: r1(0),
        l_y: r1(1),
        l_u: r1(2),
        l_v: r1(3),
        l_uu: r2(2, 2),
        l_uv: r2(2, 3),
        l_vv: r2(3, 3),
        l_xu: r2(0, 2),
        l_xv: r2(0, 3),
        l_yu: r2(1, 2),
        l_yv: r2(1, 3),
    }
}

/// Classical fixed-step RK4 over `[0, t_end]`, returning the state after
/// every step.
pub fn rk4<const N: usize>(
    f: impl Fn(&[f64; N]) -> [f64; N],
    y0: [f64; N],
    t_end: f64,
    steps: usize,
) -> Vec<[f64; N]> {
    let h = t_end / steps as f64;
    let add = |a: &[f64; N], b: &[f64; N], s: f64| {
        let mut c = *a;
        for i in 0..N {
            c[i] += s * b[i];
        }
        c
    };
    let mut out = vec![y0];
    let mut y = y0;
    for _ in 0..steps {
        let k1 = f(&y);
        let k2 = f(&add(&y, &k1, h / 2.0));
        let k3 = f(&add(&y, &k2, h / 2.0));
        let k4 = f(&add(&y, &k3, h));
        for i in 0..N {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out.push(y);
    }
    out
}

/// Geodesics of `(dx² + dy²)/cos²y` parametrised so that the Euclidean speed
/// equals `cos y`, via the Christoffel symbols of `e^{2σ}δ`, `σ = −ln cos y`.
pub fn conformal_geodesic(p0: Point2, phi: f64, t_end: f64, steps: usize) -> Vec<[f64; 4]> {
    let c = p0.y.cos();
    rk4(
        |s: &[f64; 4]| {
            let g = s[1].tan();
            [s[2], s[3], -2.0 * g * s[2] * s[3], g * (s[2] * s[2] - s[3] * s[3])]
        },
        [p0.x, p0.y, c * phi.cos(), c * phi.sin()],
        t_end,
        steps,
    )
}

/// Time-optimal paths of the quartic-current problem from the maximum
/// principle: state `(x, y)` and costate `(p, q)` with Hamiltonian
/// `p w(y) + s(y) |(p, q)|`. `unit_speed` selects `s ≡ 1` instead of `cos y`.
pub fn pontryagin_path(p0: Point2, phi: f64, t_end: f64, steps: usize, unit_speed: bool) -> Vec<[f64; 4]> {
    rk4(
        |z: &[f64; 4]| {
            let (y, p, q) = (z[1], z[2], z[3]);
            let w = A * (B - y * y).powi(2);
            let dw = -4.0 * A * y * (B - y * y);
            let (s, ds) = if unit_speed { (1.0, 0.0) } else { (y.cos(), -y.sin()) };
            let n = (p * p + q * q).sqrt();
            [w + s * p / n, s * q / n, 0.0, -(p * dw + ds * n)]
        },
        [p0.x, p0.y, phi.cos(), phi.sin()],
        t_end,
        steps,
    )
}

/// Root of `cos y − a (1 − y²)²` on `[1, 1.5]` by plain bisection.
pub fn boundary_root_bisection() -> f64 {
    let f = |y: f64| y.cos() - A * (1.0 - y * y).powi(2);
    let (mut lo, mut hi) = (1.0, 1.5);
    assert!(f(lo) > 0.0 && f(hi) < 0.0);
    while hi - lo > 1e-15 {
        let m = 0.5 * (lo + hi);
        if f(m) > 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}

/// Relative error of `got` against `want`, with the denominator floored at
/// `floor`.
pub fn rel_err(got: f64, want: f64, floor: f64) -> f64 {
    (got - want).abs() / want.abs().max(floor)
}
