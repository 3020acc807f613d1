//! Geodesic spray of the navigation metric and time-optimal path integration.
//!
//! Geodesics solve `ẍⁱ + 2Gⁱ(x, ẋ) = 0`. In two dimensions, with `L = ½F²`
//! and `(u, v)` the velocity components,
//!
//! ```text
//! G¹ = [ L_vv (L_xu u + L_yu v − L_x) − L_uv (L_xv u + L_yv v − L_y) ] / 2D
//! G² = [ −L_uv (L_xu u + L_yu v − L_x) + L_uu (L_xv u + L_yv v − L_y) ] / 2D
//! D  = L_uu L_vv − L_uv²
//! ```

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{NavigationData, Point2, Tangent2};
use crate::ode::{self, Halt, Segment, StepControl};
use crate::randers::{RandersMetric, SecondOrderJet};

/// Below this the fundamental form counts as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// Spray coefficients `(G¹, G²)` assembled from a jet of `L = ½F²` at `(p, t)`.
pub fn spray_from_jet(j: &SecondOrderJet, t: Tangent2) -> Result<[f64; 2]> {
    let det = j.fundamental_det();
    if !(det.abs() >= DEGENERACY_THRESHOLD) {
        return Err(Error::Degenerate { det });
    }
    let a = j.l_xu * t.u + j.l_yu * t.v - j.l_x;
    let b = j.l_xv * t.u + j.l_yv * t.v - j.l_y;
    let denom = 2.0 * det;
    Ok([
        (j.l_vv * a - j.l_uv * b) / denom,
        (-j.l_uv * a + j.l_uu * b) / denom,
    ])
}

/// The spray of a [`RandersMetric`].
#[derive(Clone, Debug)]
pub struct SprayField {
    metric: RandersMetric,
}

impl SprayField {
    pub fn new(metric: RandersMetric) -> Self {
        Self { metric }
    }

    pub fn from_data(data: NavigationData) -> Self {
        Self::new(RandersMetric::new(data))
    }

    pub fn metric(&self) -> &RandersMetric {
        &self.metric
    }

    pub fn data(&self) -> &NavigationData {
        self.metric.data()
    }

    pub fn coefficients(&self, p: Point2, t: Tangent2) -> Result<[f64; 2]> {
        let j = self.metric.jet(p, t)?;
        spray_from_jet(&j, t)
    }
}

/// Initial velocity for a relative heading `phi0`: the current plus the ship's
/// own velocity, the latter expressed in the h-orthonormal frame at `p0`.
pub fn initial_velocity(data: &NavigationData, p0: Point2, phi0: f64) -> Result<Tangent2> {
    let metric = RandersMetric::new(data.clone());
    let lam = metric.lambda(p0);
    if !(lam > 0.0) {
        return Err(Error::Convexity {
            x: p0.x,
            y: p0.y,
            lambda: lam,
        });
    }
    let frame = data.frame(p0)?;
    let own = frame.to_coords([phi0.cos(), phi0.sin()]);
    let w = data.wind.at(p0);
    let s = data.speed.value(p0);
    Ok(Tangent2::new(w.u + s * own.u, w.v + s * own.v))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialCondition {
    pub p0: Point2,
    /// Relative heading, normalised to `[0, 2π)`.
    pub phi0: f64,
    pub velocity: Tangent2,
}

/// Largest accepted deviation of `F̃(p0, velocity)` from one.
pub const UNIT_SPEED_TOL: f64 = 1e-10;

impl InitialCondition {
    pub fn new(metric: &RandersMetric, p0: Point2, phi0: f64) -> Result<Self> {
        let phi0 = phi0.rem_euclid(TAU);
        let velocity = initial_velocity(metric.data(), p0, phi0)?;
        let f = metric.evaluate(p0, velocity)?;
        if !((f - 1.0).abs() <= UNIT_SPEED_TOL) {
            return Err(Error::InvalidArgument(format!(
                "initial velocity has F = {f}, expected 1"
            )));
        }
        Ok(Self { p0, phi0, velocity })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeodesicState {
    pub p: Point2,
    pub t: Tangent2,
    pub time: f64,
}

impl GeodesicState {
    fn from_array(time: f64, s: [f64; 4]) -> Self {
        Self {
            p: Point2::new(s[0], s[1]),
            t: Tangent2::new(s[2], s[3]),
            time,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Termination {
    TimeReached,
    LeftDomain,
    ConvexityViolated,
    StepFailure,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::TimeReached => "time_reached",
            Termination::LeftDomain => "left_domain",
            Termination::ConvexityViolated => "convexity_violated",
            Termination::StepFailure => "step_failure",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
    /// Largest scaled local error estimate among accepted steps.
    pub max_error_estimate: f64,
}

/// An integrated geodesic with its dense output.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub initial: InitialCondition,
    pub samples: Vec<GeodesicState>,
    /// `F̃(p, t)` at each sample.
    pub speeds: Vec<f64>,
    pub diagnostics: Diagnostics,
    pub termination: Termination,
    segments: Vec<Segment<4>>,
}

const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
    (0.906_179_845_938_664, 0.236_926_885_056_189_08),
];

impl Trajectory {
    pub fn final_state(&self) -> GeodesicState {
        *self.samples.last().expect("trajectory has at least one sample")
    }

    pub fn final_time(&self) -> f64 {
        self.final_state().time
    }

    /// Time taken to traverse the path: the last recorded time.
    pub fn transit_time(&self) -> f64 {
        self.final_time()
    }

    /// Dense-output state at `time`, if it lies within the integrated span.
    pub fn state_at(&self, time: f64) -> Option<GeodesicState> {
        let first = self.samples.first()?;
        if time < first.time || time > self.final_time() {
            return None;
        }
        if self.segments.is_empty() {
            return Some(*first);
        }
        let idx = self
            .segments
            .partition_point(|s| s.t1 < time)
            .min(self.segments.len() - 1);
        Some(GeodesicState::from_array(
            time,
            self.segments[idx].eval(time),
        ))
    }

    /// Largest `|F̃/F̃₀ − 1|` over the samples.
    pub fn max_speed_drift(&self) -> f64 {
        let f0 = self.speeds[0];
        self.speeds
            .iter()
            .map(|f| (f / f0 - 1.0).abs())
            .fold(0.0, |a, b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) })
    }

    /// `∫ f(p(t), ṗ(t)) dt` along the path, by 5-point Gauss–Legendre on
    /// every step of the dense output.
    pub fn integrate_along(&self, f: impl Fn(Point2, Tangent2) -> f64) -> f64 {
        self.segments
            .iter()
            .map(|seg| {
                let half = 0.5 * (seg.t1 - seg.t0);
                let mid = 0.5 * (seg.t1 + seg.t0);
                GAUSS5
                    .iter()
                    .map(|(x, w)| {
                        let s = seg.eval(mid + half * x);
                        w * f(Point2::new(s[0], s[1]), Tangent2::new(s[2], s[3]))
                    })
                    .sum::<f64>()
                    * half
            })
            .sum()
    }

    /// Travel time recomputed as the `F̃`-length of the path.
    pub fn metric_length(&self, metric: &RandersMetric) -> f64 {
        self.integrate_along(|p, t| metric.evaluate(p, t).unwrap_or(f64::NAN))
    }

    /// Length of the path in the background metric.
    pub fn h_length(&self, data: &NavigationData) -> f64 {
        self.integrate_along(|p, t| data.h_at(p).quad(t).max(0.0).sqrt())
    }

    /// Point of the path closest (in chart distance) to `target`, refined on
    /// the dense output. Returns `(time, distance)`.
    pub fn closest_approach(&self, target: Point2) -> (f64, f64) {
        let dist = |time: f64| {
            self.state_at(time)
                .map(|s| s.p.distance(&target))
                .unwrap_or(f64::INFINITY)
        };
        const PER_STEP: usize = 8;
        let mut best = (self.samples[0].time, self.samples[0].p.distance(&target));
        let mut width = 0.0;
        for seg in &self.segments {
            let w = (seg.t1 - seg.t0) / PER_STEP as f64;
            for k in 1..=PER_STEP {
                let t = seg.t0 + w * k as f64;
                let s = seg.eval(t);
                let d = Point2::new(s[0], s[1]).distance(&target);
                if d < best.1 {
                    best = (t, d);
                    width = w;
                }
            }
        }
        if width == 0.0 {
            return best;
        }
        let lo = (best.0 - width).max(self.samples[0].time);
        let hi = (best.0 + width).min(self.final_time());
        let refined = golden_min(&dist, lo, hi, 1e-14);
        if refined.1 < best.1 {
            refined
        } else {
            best
        }
    }
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
pub(crate) fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Integrates the geodesic from `ic` until `t_end` or early termination.
pub fn integrate_geodesic(
    spray: &SprayField,
    ic: &InitialCondition,
    t_end: f64,
    ctl: &StepControl,
) -> Result<Trajectory> {
    if !(t_end > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "end time must be positive, got {t_end}"
        )));
    }
    let domain = spray.data().domain;
    if !domain.contains(ic.p0) {
        return Err(Error::OutsideDomain {
            x: ic.p0.x,
            y: ic.p0.y,
        });
    }
    let rhs = |_t: f64, s: &[f64; 4]| -> std::result::Result<[f64; 4], (Error, Point2)> {
        let p = Point2::new(s[0], s[1]);
        let v = Tangent2::new(s[2], s[3]);
        let g = spray.coefficients(p, v).map_err(|e| (e, p))?;
        Ok([s[2], s[3], -2.0 * g[0], -2.0 * g[1]])
    };
    let inside = |s: &[f64; 4]| domain.contains(Point2::new(s[0], s[1]));
    let y0 = [ic.p0.x, ic.p0.y, ic.velocity.u, ic.velocity.v];
    let sol = ode::integrate(rhs, 0.0, y0, t_end, ctl, |seg| {
        let end = seg.end();
        inside(&end) && end.iter().all(|v| v.is_finite())
    });

    let mut segments = sol.segments;
    let termination = match sol.halt {
        Halt::Completed => Termination::TimeReached,
        Halt::Stopped => {
            let last = segments.pop().expect("stopped after an accepted step");
            if last.end().iter().all(|v| v.is_finite()) {
                // bisect for the exit time on the dense output
                let (mut a, mut b) = (last.t0, last.t1);
                for _ in 0..100 {
                    let m = 0.5 * (a + b);
                    if m == a || m == b {
                        break;
                    }
                    if inside(&last.eval(m)) {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                if a > last.t0 {
                    segments.push(last.truncated(a));
                }
                Termination::LeftDomain
            } else {
                Termination::StepFailure
            }
        }
        Halt::RhsFailure((err, p)) => {
            if !domain.contains(p) {
                Termination::LeftDomain
            } else {
                match err {
                    Error::Convexity { .. } | Error::Degenerate { .. } => {
                        Termination::ConvexityViolated
                    }
                    _ => Termination::StepFailure,
                }
            }
        }
        Halt::StepUnderflow | Halt::MaxSteps => Termination::StepFailure,
    };

    let mut samples = vec![GeodesicState::from_array(0.0, y0)];
    samples.extend(
        segments
            .iter()
            .map(|s| GeodesicState::from_array(s.t1, s.end())),
    );
    let metric = spray.metric();
    let speeds = samples
        .iter()
        .map(|s| metric.evaluate(s.p, s.t).unwrap_or(f64::NAN))
        .collect();
    Ok(Trajectory {
        initial: *ic,
        samples,
        speeds,
        diagnostics: Diagnostics {
            accepted_steps: sol.stats.accepted,
            rejected_steps: sol.stats.rejected,
            rhs_evaluations: sol.stats.evaluations,
            max_error_estimate: sol.stats.max_error,
        },
        termination,
        segments,
    })
}

/// Integrates one geodesic per heading, in parallel; results keep input order.
pub fn integrate_fan(
    spray: &SprayField,
    p0: Point2,
    headings: &[f64],
    t_end: f64,
    ctl: &StepControl,
) -> Vec<Result<Trajectory>> {
    headings
        .par_iter()
        .map(|&phi| {
            let ic = InitialCondition::new(spray.metric(), p0, phi)?;
            integrate_geodesic(spray, &ic, t_end, ctl)
        })
        .collect()
}

/// `n` equally spaced headings `0, 2π/n, …`.
pub fn heading_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}
