//! Dormand–Prince 5(4) with step-size control and 4th-order dense output.

/// Local error tolerance for the embedded error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    pub tol: Tolerance,
    /// Initial step; estimated from the problem when `None`.
    pub first_step: Option<f64>,
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            tol: Tolerance::default(),
            first_step: None,
            max_step: f64::INFINITY,
            min_step: 1e-13,
            max_steps: 200_000,
        }
    }
}

impl StepControl {
    pub fn with_tolerance(tol: Tolerance) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// One accepted step with its continuous extension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    cont: [[f64; N]; 5],
}

impl<const N: usize> Segment<N> {
    pub fn start(&self) -> [f64; N] {
        self.cont[0]
    }

    pub fn end(&self) -> [f64; N] {
        self.eval(self.t1)
    }

    /// Dense-output state at `t ∈ [t0, t1]`.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        let th = if h == 0.0 { 0.0 } else { (t - self.t0) / h };
        let th1 = 1.0 - th;
        let c = &self.cont;
        std::array::from_fn(|i| {
            c[0][i] + th * (c[1][i] + th1 * (c[2][i] + th * (c[3][i] + th1 * c[4][i])))
        })
    }

    /// The same polynomial, restricted to `[t0, t]`.
    ///
    /// The interpolant is a quartic in θ, so sampling it at five nodes of the
    /// shorter interval and refitting reproduces it exactly.
    pub fn truncated(&self, t: f64) -> Self {
        let h = t - self.t0;
        let vals: Vec<[f64; N]> = [0.0, 0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|s| self.eval(self.t0 + s * h))
            .collect();
        Self {
            t0: self.t0,
            t1: t,
            cont: fit_quartic(&vals),
        }
    }
}

/// Coefficients of the nested form used by [`Segment::eval`] from values at
/// θ = 0, ¼, ½, ¾, 1.
fn fit_quartic<const N: usize>(vals: &[[f64; N]]) -> [[f64; N]; 5] {
    // p(θ) = c0 + θ(c1 + (1−θ)(c2 + θ(c3 + (1−θ)c4)))
    // p(0) = c0, p(1) = c0 + c1; the remaining three follow from the interior
    // nodes via a 3×3 linear solve.
    let mut out = [[0.0; N]; 5];
    let th = [0.25, 0.5, 0.75];
    // basis columns for c2, c3, c4 at each interior node
    let basis: Vec<[f64; 3]> = th
        .iter()
        .map(|&t| {
            let t1 = 1.0 - t;
            [t * t1, t * t1 * t, t * t1 * t * t1]
        })
        .collect();
    let m = [basis[0], basis[1], basis[2]];
    let inv = invert3(m);
    for i in 0..N {
        let c0 = vals[0][i];
        let c1 = vals[4][i] - c0;
        let rhs: Vec<f64> = th
            .iter()
            .enumerate()
            .map(|(k, &t)| vals[k + 1][i] - c0 - t * c1)
            .collect();
        out[0][i] = c0;
        out[1][i] = c1;
        for r in 0..3 {
            out[2 + r][i] = inv[r][0] * rhs[0] + inv[r][1] * rhs[1] + inv[r][2] * rhs[2];
        }
    }
    out
}

fn invert3(m: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let cof = |r: usize, c: usize| {
        let rows: Vec<usize> = (0..3).filter(|&k| k != r).collect();
        let cols: Vec<usize> = (0..3).filter(|&k| k != c).collect();
        let minor = m[rows[0]][cols[0]] * m[rows[1]][cols[1]]
            - m[rows[0]][cols[1]] * m[rows[1]][cols[0]];
        if (r + c) % 2 == 0 {
            minor
        } else {
            -minor
        }
    };
    // inverse = adjugate / det, adjugate = cofactor transposed
    std::array::from_fn(|r| std::array::from_fn(|c| cof(c, r) / det))
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
    /// Largest scaled error norm among accepted steps (≤ 1 by construction).
    pub max_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Halt<E> {
    /// Reached the requested end time.
    Completed,
    /// The step observer asked to stop.
    Stopped,
    /// The right-hand side kept failing until the step size underflowed.
    RhsFailure(E),
    /// Error control drove the step below the minimum.
    StepUnderflow,
    MaxSteps,
}

#[derive(Clone, Debug)]
pub struct Solution<const N: usize, E> {
    pub segments: Vec<Segment<N>>,
    pub halt: Halt<E>,
    pub stats: Stats,
}

// Butcher tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const RHS_FAILURE_SHRINK: f64 = 0.25;

fn combo<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

fn error_norm<const N: usize>(e: &[f64; N], y0: &[f64; N], y1: &[f64; N], tol: &Tolerance) -> f64 {
    let s: f64 = (0..N)
        .map(|i| {
            let sk = tol.atol + tol.rtol * y0[i].abs().max(y1[i].abs());
            (e[i] / sk).powi(2)
        })
        .sum();
    (s / N as f64).sqrt()
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end`.
///
/// `observe` sees every accepted segment and returns `false` to stop.
pub fn integrate<const N: usize, E, F, O>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    ctl: &StepControl,
    mut observe: O,
) -> Solution<N, E>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    O: FnMut(&Segment<N>) -> bool,
{
    let mut stats = Stats::default();
    let mut segments = Vec::new();
    let finish = |segments, halt, stats| Solution {
        segments,
        halt,
        stats,
    };

    let mut k1 = match f(t0, &y0) {
        Ok(k) => k,
        Err(e) => return finish(segments, Halt::RhsFailure(e), stats),
    };
    stats.evaluations += 1;
    if t_end <= t0 {
        return finish(segments, Halt::Completed, stats);
    }

    let mut h = match ctl.first_step {
        Some(h) => h,
        None => initial_step(&mut f, t0, &y0, &k1, ctl, &mut stats),
    }
    .min(ctl.max_step)
    .min(t_end - t0);
    let mut t = t0;
    let mut y = y0;
    let mut last_reject = false;

    loop {
        if stats.accepted + stats.rejected >= ctl.max_steps {
            return finish(segments, Halt::MaxSteps, stats);
        }
        if h < ctl.min_step.max(16.0 * f64::EPSILON * t.abs()) {
            return finish(segments, Halt::StepUnderflow, stats);
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        let stages = (|| -> Result<_, E> {
            let k2 = f(t + C2 * h, &combo(&y, h, &[(A21, &k1)]))?;
            let k3 = f(t + C3 * h, &combo(&y, h, &[(A31, &k1), (A32, &k2)]))?;
            let k4 = f(
                t + C4 * h,
                &combo(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            )?;
            let k5 = f(
                t + C5 * h,
                &combo(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            )?;
            let k6 = f(
                t + h,
                &combo(
                    &y,
                    h,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            )?;
            let y1 = combo(
                &y,
                h,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let k7 = f(t + h, &y1)?;
            Ok((k2, k3, k4, k5, k6, k7, y1))
        })();

        let (_k2, k3, k4, k5, k6, k7, y1) = match stages {
            Ok(s) => {
                stats.evaluations += 6;
                s
            }
            Err(e) => {
                stats.rejected += 1;
                h *= RHS_FAILURE_SHRINK;
                last_reject = true;
                if h < ctl.min_step.max(16.0 * f64::EPSILON * t.abs()) {
                    return finish(segments, Halt::RhsFailure(e), stats);
                }
                continue;
            }
        };

        let err_vec: [f64; N] = std::array::from_fn(|i| {
            h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        });
        let err = error_norm(&err_vec, &y, &y1, &ctl.tol);
        let fac = if err == 0.0 {
            FAC_MAX
        } else {
            (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
        };

        if err <= 1.0 && err.is_finite() {
            let ydiff: [f64; N] = std::array::from_fn(|i| y1[i] - y[i]);
            let bspl: [f64; N] = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
            let cont = [
                y,
                ydiff,
                bspl,
                std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]),
                std::array::from_fn(|i| {
                    h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
                }),
            ];
            let t_new = if last { t_end } else { t + h };
            let seg = Segment {
                t0: t,
                t1: t_new,
                cont,
            };
            stats.accepted += 1;
            stats.max_error = stats.max_error.max(err);
            segments.push(seg);
            t = t_new;
            y = y1;
            k1 = k7;
            if !observe(&seg) {
                return finish(segments, Halt::Stopped, stats);
            }
            if last {
                return finish(segments, Halt::Completed, stats);
            }
            let fac = if last_reject { fac.min(1.0) } else { fac };
            last_reject = false;
            h = (h * fac).min(ctl.max_step);
        } else {
            stats.rejected += 1;
            last_reject = true;
            h *= if err.is_finite() { fac.min(1.0) } else { FAC_MIN };
        }
    }
}

/// Starting step after Hairer, Nørsett & Wanner, II.4.
fn initial_step<const N: usize, E, F>(
    f: &mut F,
    t0: f64,
    y0: &[f64; N],
    k0: &[f64; N],
    ctl: &StepControl,
    stats: &mut Stats,
) -> f64
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
{
    let tol = &ctl.tol;
    let scale = |i: usize| tol.atol + tol.rtol * y0[i].abs();
    let rms = |v: &[f64; N]| {
        ((0..N).map(|i| (v[i] / scale(i)).powi(2)).sum::<f64>() / N as f64).sqrt()
    };
    let d0 = rms(y0);
    let d1 = rms(k0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1: [f64; N] = std::array::from_fn(|i| y0[i] + h0 * k0[i]);
    let d2 = match f(t0 + h0, &y1) {
        Ok(k1) => {
            stats.evaluations += 1;
            let diff: [f64; N] = std::array::from_fn(|i| k1[i] - k0[i]);
            rms(&diff) / h0
        }
        Err(_) => return h0,
    };
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}
