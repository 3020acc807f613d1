//! Indicatrices, reachable sets, target shooting and transit-time comparison
//! between constant-speed and variable-speed navigation.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Frame, NavigationData, Point2, Tangent2};
use crate::ode::StepControl;
use crate::randers::RandersMetric;
use crate::spray::{
    golden_min, initial_velocity, integrate_fan, integrate_geodesic, GeodesicState,
    InitialCondition, SprayField, Termination, Trajectory, UNIT_SPEED_TOL,
};

/// Which navigation problem a metric solves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MetricKind {
    /// Ship speed identically one.
    Classical,
    /// Any other speed field.
    Generalized,
}

impl MetricKind {
    pub fn of(data: &NavigationData) -> Self {
        let s = data.speed.expr();
        if s.is_constant() && s.eval::<f64>(0.0, 0.0) == 1.0 {
            MetricKind::Classical
        } else {
            MetricKind::Generalized
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            MetricKind::Classical => "classical",
            MetricKind::Generalized => "generalized",
        }
    }
}

/// Sampled unit level set `{t : F̃(p, t) = 1}`.
#[derive(Clone, Debug)]
pub struct Indicatrix {
    pub base: Point2,
    pub kind: MetricKind,
    /// The current `W(p)`, centre of the curve.
    pub center: Tangent2,
    /// Ship speed at `p`, the h-radius of the curve.
    pub radius: f64,
    pub frame: Frame,
    pub headings: Vec<f64>,
    pub samples: Vec<Tangent2>,
}

impl Indicatrix {
    /// Centre in h-orthonormal frame components.
    pub fn center_frame(&self) -> [f64; 2] {
        self.frame.to_frame(self.center)
    }

    /// h-distance from the zero vector to the curve along the frame direction
    /// `theta`.
    pub fn radial_support(&self, theta: f64) -> f64 {
        let c = self.center_frame();
        let p = c[0] * theta.cos() + c[1] * theta.sin();
        let q = p * p + self.radius * self.radius - (c[0] * c[0] + c[1] * c[1]);
        p + q.max(0.0).sqrt()
    }
}

pub fn sample_indicatrix(metric: &RandersMetric, p: Point2, n: usize) -> Result<Indicatrix> {
    if n < 8 {
        return Err(Error::InvalidArgument(format!(
            "indicatrix needs at least 8 headings, got {n}"
        )));
    }
    let data = metric.data();
    let frame = data.frame(p)?;
    let headings: Vec<f64> = (0..n).map(|k| TAU * k as f64 / n as f64).collect();
    let samples = headings
        .iter()
        .map(|&phi| {
            let t = initial_velocity(data, p, phi)?;
            let f = metric.evaluate(p, t)?;
            if (f - 1.0).abs() > UNIT_SPEED_TOL {
                return Err(Error::InvalidArgument(format!(
                    "indicatrix sample at heading {phi} has F = {f}"
                )));
            }
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Indicatrix {
        base: p,
        kind: MetricKind::of(data),
        center: data.wind.at(p),
        radius: data.speed.value(p),
        frame,
        headings,
        samples,
    })
}

/// Differences of radial support below this count as equal.
pub const RADIAL_DEADBAND: f64 = 1e-10;
/// Width to which crossing directions are bisected.
pub const CROSSING_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Containment {
    FirstInsideSecond,
    SecondInsideFirst,
}

/// Where two indicatrices at one base point meet. Directions are angles of
/// rays from the zero vector in the h-orthonormal frame.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IntersectionReport {
    /// Directions where the radial difference changes sign.
    pub crossings: Vec<f64>,
    /// Directions where the curves meet without changing order.
    pub touches: Vec<f64>,
    pub coincident: bool,
    pub containment: Option<Containment>,
}

pub fn indicatrix_intersections(a: &Indicatrix, b: &Indicatrix) -> Result<IntersectionReport> {
    if a.base != b.base || a.frame != b.frame {
        return Err(Error::InvalidArgument(
            "indicatrices are not based at the same point".into(),
        ));
    }
    let n = (4 * a.headings.len().max(b.headings.len())).max(720);
    let diff = |th: f64| a.radial_support(th) - b.radial_support(th);
    let class = |d: f64| {
        if d > RADIAL_DEADBAND {
            1
        } else if d < -RADIAL_DEADBAND {
            -1
        } else {
            0
        }
    };
    let thetas: Vec<f64> = (0..n).map(|k| TAU * k as f64 / n as f64).collect();
    let signs: Vec<i32> = thetas.iter().map(|&t| class(diff(t))).collect();

    let mut report = IntersectionReport::default();
    if signs.iter().all(|&s| s == 0) {
        report.coincident = true;
        return Ok(report);
    }

    // Walk the circle starting just after a nonzero sample, so runs of zeros
    // never wrap.
    let start = signs.iter().position(|&s| s != 0).expect("nonzero sample");
    let mut prev = (start, signs[start]);
    let mut k = 1;
    while k <= n {
        let i = (start + k) % n;
        let s = signs[i];
        if s == 0 {
            k += 1;
            continue;
        }
        let gap = (i + n - prev.0) % n;
        let t0 = thetas[prev.0];
        let t1 = t0 + TAU * gap as f64 / n as f64;
        if gap > 1 {
            // run of equal samples between prev and i
            let (tmin, _) = golden_min(&|t: f64| diff(t).abs(), t0, t1, CROSSING_TOL);
            if s == prev.1 {
                report.touches.push(tmin.rem_euclid(TAU));
            } else {
                report.crossings.push(tmin.rem_euclid(TAU));
            }
        } else if s != prev.1 {
            let (mut lo, mut hi) = (t0, t1);
            while hi - lo > CROSSING_TOL {
                let m = 0.5 * (lo + hi);
                if (diff(m) > 0.0) == (prev.1 > 0) {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            report.crossings.push((0.5 * (lo + hi)).rem_euclid(TAU));
        }
        prev = (i, s);
        k += 1;
    }
    // tangential contacts that fall between grid samples
    let step = TAU / n as f64;
    for i in 0..n {
        let d0 = diff(thetas[i]).abs();
        let dl = diff(thetas[i] - step).abs();
        let dr = diff(thetas[i] + step).abs();
        let same = signs[(i + n - 1) % n] == signs[i] && signs[(i + 1) % n] == signs[i];
        if signs[i] == 0 || !same || !(d0 <= dl && d0 < dr) {
            continue;
        }
        let (t, d) = golden_min(&|t: f64| diff(t).abs(), thetas[i] - step, thetas[i] + step, CROSSING_TOL);
        if d <= RADIAL_DEADBAND {
            report.touches.push(t.rem_euclid(TAU));
        }
    }
    report.crossings.sort_by(f64::total_cmp);
    report.touches.sort_by(f64::total_cmp);
    if report.crossings.is_empty() {
        report.containment = if signs.iter().any(|&s| s > 0) {
            Some(Containment::SecondInsideFirst)
        } else {
            Some(Containment::FirstInsideSecond)
        };
    }
    Ok(report)
}

/// Final state of the geodesic for one heading of a reachable-set sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub heading: f64,
    pub termination: Termination,
    pub last: GeodesicState,
}

#[derive(Clone, Debug)]
pub struct ReachableSet {
    pub base: Point2,
    pub horizon: f64,
    /// One entry per heading, in heading order.
    pub rays: Vec<Ray>,
}

impl ReachableSet {
    /// Endpoints of geodesics that ran for the full horizon.
    pub fn endpoints(&self) -> Vec<(f64, Point2)> {
        self.rays
            .iter()
            .filter(|r| r.termination == Termination::TimeReached)
            .map(|r| (r.heading, r.last.p))
            .collect()
    }

    pub fn early_terminations(&self) -> Vec<Ray> {
        self.rays
            .iter()
            .filter(|r| r.termination != Termination::TimeReached)
            .copied()
            .collect()
    }

    /// Last positions of all rays in heading order, forming a closed curve
    /// that follows the domain boundary where rays left the domain.
    pub fn frontier(&self) -> Vec<Point2> {
        self.rays.iter().map(|r| r.last.p).collect()
    }
}

pub fn reachable_set(
    spray: &SprayField,
    p0: Point2,
    horizon: f64,
    headings: &[f64],
    ctl: &StepControl,
) -> Result<ReachableSet> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let rays = integrate_fan(spray, p0, headings, horizon, ctl)
        .into_iter()
        .map(|tr| {
            let tr = tr?;
            Ok(Ray {
                heading: tr.initial.phi0,
                termination: tr.termination,
                last: tr.final_state(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReachableSet {
        base: p0,
        horizon,
        rays,
    })
}

/// Winding number of a closed polygon around `pt`.
pub fn winding_number(pt: Point2, poly: &[Point2]) -> i32 {
    let n = poly.len();
    let mut w = 0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let cross = (b.x - a.x) * (pt.y - a.y) - (pt.x - a.x) * (b.y - a.y);
        if a.y <= pt.y {
            if b.y > pt.y && cross > 0.0 {
                w += 1;
            }
        } else if b.y <= pt.y && cross < 0.0 {
            w -= 1;
        }
    }
    w
}

/// Nonzero-winding inside test, so points in the loops of a self-intersecting
/// wavefront still count as enclosed.
pub fn point_in_polygon(pt: Point2, poly: &[Point2]) -> bool {
    winding_number(pt, poly) != 0
}

/// Distance from `pt` to the edges of a closed polygon.
pub fn distance_to_polygon(pt: Point2, poly: &[Point2]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            let len2 = dx * dx + dy * dy;
            let s = if len2 > 0.0 {
                (((pt.x - a.x) * dx + (pt.y - a.y) * dy) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            Point2::new(a.x + s * dx, a.y + s * dy).distance(&pt)
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug)]
pub struct ShootingOptions {
    /// Integration horizon for each trial heading.
    pub horizon: f64,
    /// Number of headings in the initial scan of the bracket.
    pub scan: usize,
    /// Width to which the heading is refined.
    pub heading_tol: f64,
    pub step: StepControl,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            horizon: 8.0,
            scan: 72,
            heading_tol: 1e-12,
            step: StepControl::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ShootingResult {
    pub target: Point2,
    pub phi0: f64,
    pub arrival_time: f64,
    pub position_error: f64,
    pub trajectory: Trajectory,
}

#[derive(Clone, Debug)]
pub enum ShootingOutcome {
    Found(ShootingResult),
    NotFound {
        target: Point2,
        best_phi: f64,
        best_distance: f64,
    },
}

impl ShootingOutcome {
    pub fn found(&self) -> Option<&ShootingResult> {
        match self {
            ShootingOutcome::Found(r) => Some(r),
            ShootingOutcome::NotFound { .. } => None,
        }
    }
}

/// Finds the heading whose geodesic from `p0` passes within `tolerance` of
/// `target` earliest. Headings are scanned over `bracket`, then every local
/// minimum of the closest-approach distance is refined by golden section.
pub fn shoot_to_target(
    spray: &SprayField,
    p0: Point2,
    target: Point2,
    tolerance: f64,
    bracket: (f64, f64),
    opts: &ShootingOptions,
) -> Result<ShootingOutcome> {
    let (lo, hi) = bracket;
    if !(tolerance > 0.0) || !(hi > lo) || opts.scan < 3 {
        return Err(Error::InvalidArgument(format!(
            "bad shooting setup: tolerance {tolerance}, bracket [{lo}, {hi}], scan {}",
            opts.scan
        )));
    }
    let periodic = hi - lo >= TAU - 1e-12;
    let n = opts.scan;
    let step = if periodic {
        TAU / n as f64
    } else {
        (hi - lo) / (n - 1) as f64
    };
    let phis: Vec<f64> = (0..n).map(|k| lo + step * k as f64).collect();

    let shoot = |phi: f64| -> Result<(Trajectory, f64, f64)> {
        let ic = InitialCondition::new(spray.metric(), p0, phi)?;
        let tr = integrate_geodesic(spray, &ic, opts.horizon, &opts.step)?;
        let (t, d) = tr.closest_approach(target);
        Ok((tr, t, d))
    };
    let scan = phis
        .par_iter()
        .map(|&phi| shoot(phi).map(|(_, t, d)| (t, d)))
        .collect::<Result<Vec<_>>>()?;

    let d = |i: usize| scan[i].1;
    let mut minima = Vec::new();
    for i in 0..n {
        let left = if i > 0 {
            Some(i - 1)
        } else if periodic {
            Some(n - 1)
        } else {
            None
        };
        let right = if i + 1 < n {
            Some(i + 1)
        } else if periodic {
            Some(0)
        } else {
            None
        };
        let le = left.is_none_or(|j| d(i) <= d(j));
        let re = right.is_none_or(|j| d(i) < d(j));
        if le && re {
            minima.push(i);
        }
    }

    let refined = minima
        .par_iter()
        .map(|&i| {
            let a = if periodic || i > 0 { phis[i] - step } else { phis[i] };
            let b = if periodic || i + 1 < n { phis[i] + step } else { phis[i] };
            let f = |phi: f64| shoot(phi).map(|r| r.2).unwrap_or(f64::INFINITY);
            let (phi, dist) = golden_min(&f, a, b, opts.heading_tol);
            if dist <= scan[i].1 {
                (phi, dist)
            } else {
                (phis[i], scan[i].1)
            }
        })
        .collect::<Vec<_>>();

    let mut best: Option<ShootingResult> = None;
    let mut closest = (phis[0], f64::INFINITY);
    for &(phi, dist) in &refined {
        if dist < closest.1 {
            closest = (phi, dist);
        }
        if dist > tolerance {
            continue;
        }
        let (trajectory, t, d) = shoot(phi)?;
        if best.as_ref().is_none_or(|b| t < b.arrival_time) {
            best = Some(ShootingResult {
                target,
                phi0: phi.rem_euclid(TAU),
                arrival_time: t,
                position_error: d,
                trajectory,
            });
        }
    }
    Ok(match best {
        Some(r) => ShootingOutcome::Found(r),
        None => ShootingOutcome::NotFound {
            target,
            best_phi: closest.0.rem_euclid(TAU),
            best_distance: closest.1,
        },
    })
}

/// Allowed shortfall of the variable-speed time below the constant-speed one.
pub const TRANSIT_SLACK: f64 = 1e-6;
/// Largest `|speed − 1|` along a path counted as staying on the unit-speed locus.
pub const UNIT_LOCUS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LemmaFlag {
    /// Variable-speed transit strictly slower.
    Strict,
    /// Equal times, with the path where the ship speed is one.
    EqualOnUnitSpeedLocus,
    Violated,
    /// Shooting failed under one of the metrics.
    Unavailable,
}

impl LemmaFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            LemmaFlag::Strict => "strict",
            LemmaFlag::EqualOnUnitSpeedLocus => "path_on_unit_speed_locus",
            LemmaFlag::Violated => "violated",
            LemmaFlag::Unavailable => "unavailable",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaComparison {
    pub p0: Point2,
    pub target: Point2,
    pub t_classical: Option<f64>,
    pub t_generalized: Option<f64>,
    pub phi_classical: Option<f64>,
    pub phi_generalized: Option<f64>,
    /// Largest `|speed − 1|` along the variable-speed path.
    pub speed_deviation: Option<f64>,
    pub flag: LemmaFlag,
}

impl LemmaComparison {
    pub fn gap(&self) -> Option<f64> {
        Some(self.t_generalized? - self.t_classical?)
    }
}

fn speed_deviation(data: &NavigationData, r: &ShootingResult) -> f64 {
    let tr = &r.trajectory;
    let dev = |p: Point2| (data.speed.value(p) - 1.0).abs();
    let mut worst: f64 = 0.0;
    for s in tr.samples.iter().take_while(|s| s.time <= r.arrival_time) {
        worst = worst.max(dev(s.p));
    }
    if let Some(s) = tr.state_at(r.arrival_time) {
        worst = worst.max(dev(s.p));
    }
    worst
}

/// Shoots from `p0` to `target` with the ship speed of `data` and with unit
/// speed, and classifies the two transit times.
pub fn lemma_transit_comparison(
    data: &NavigationData,
    p0: Point2,
    target: Point2,
    tolerance: f64,
    opts: &ShootingOptions,
) -> Result<LemmaComparison> {
    let full = (0.0, TAU);
    let classical = SprayField::from_data(data.classical());
    let generalized = SprayField::from_data(data.clone());
    let (c, g) = rayon::join(
        || shoot_to_target(&classical, p0, target, tolerance, full, opts),
        || shoot_to_target(&generalized, p0, target, tolerance, full, opts),
    );
    let (c, g) = (c?, g?);
    let (c, g) = (c.found(), g.found());
    let speed_dev = g.map(|g| speed_deviation(data, g));
    let flag = match (c, g) {
        (Some(c), Some(g)) => {
            let gap = g.arrival_time - c.arrival_time;
            if gap < -TRANSIT_SLACK {
                LemmaFlag::Violated
            } else if gap <= TRANSIT_SLACK {
                if speed_dev.unwrap_or(f64::INFINITY) <= UNIT_LOCUS_TOL {
                    LemmaFlag::EqualOnUnitSpeedLocus
                } else {
                    LemmaFlag::Violated
                }
            } else {
                LemmaFlag::Strict
            }
        }
        _ => LemmaFlag::Unavailable,
    };
    Ok(LemmaComparison {
        p0,
        target,
        t_classical: c.map(|r| r.arrival_time),
        t_generalized: g.map(|r| r.arrival_time),
        phi_classical: c.map(|r| r.phi0),
        phi_generalized: g.map(|r| r.phi0),
        speed_deviation: speed_dev,
        flag,
    })
}

/// Runs [`lemma_transit_comparison`] for every pair, in input order.
pub fn compare_pairs(
    data: &NavigationData,
    pairs: &[(Point2, Point2)],
    tolerance: f64,
    opts: &ShootingOptions,
) -> Vec<Result<LemmaComparison>> {
    pairs
        .par_iter()
        .map(|&(p0, target)| lemma_transit_comparison(data, p0, target, tolerance, opts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{MetricField, Rect, ScalarField, VectorField};
    use crate::spray::heading_grid;
    use std::f64::consts::PI;

    fn flat() -> NavigationData {
        NavigationData::new(
            MetricField::euclidean(),
            VectorField::zero(),
            ScalarField::constant(1.0),
            Rect::new(-10.0, 10.0, -10.0, 10.0),
        )
    }

    fn quartic() -> NavigationData {
        NavigationData::quartic_current(0.8, 1.0)
    }

    #[test]
    fn metric_kind_from_speed() {
        assert_eq!(MetricKind::of(&flat()), MetricKind::Classical);
        assert_eq!(MetricKind::of(&quartic()), MetricKind::Generalized);
        assert_eq!(MetricKind::of(&quartic().classical()), MetricKind::Classical);
    }

    #[test]
    fn flat_indicatrix_is_unit_circle() {
        let m = RandersMetric::new(flat());
        let ind = sample_indicatrix(&m, Point2::new(1.0, 1.0), 16).unwrap();
        for t in &ind.samples {
            assert!((t.euclidean_norm() - 1.0).abs() < 1e-15);
        }
        assert!(sample_indicatrix(&m, Point2::new(0.0, 0.0), 7).is_err());
    }

    #[test]
    fn quartic_indicatrices() {
        let m = RandersMetric::new(quartic());
        let ind = sample_indicatrix(&m, Point2::new(0.0, 0.0), 360).unwrap();
        let xs: Vec<f64> = ind.samples.iter().map(|t| t.u).collect();
        let max = xs.iter().cloned().fold(f64::MIN, f64::max);
        let min = xs.iter().cloned().fold(f64::MAX, f64::min);
        assert!((max - 1.8).abs() < 1e-15);
        assert!((min + 0.2).abs() < 1e-15);
        let ind = sample_indicatrix(&m, Point2::new(0.0, 1.0), 64).unwrap();
        for t in &ind.samples {
            assert!((t.euclidean_norm() - 1f64.cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn radial_support_matches_samples() {
        let m = RandersMetric::new(quartic());
        let ind = sample_indicatrix(&m, Point2::new(0.3, 0.4), 32).unwrap();
        for t in &ind.samples {
            let f = ind.frame.to_frame(*t);
            let th = f[1].atan2(f[0]);
            let r = (f[0] * f[0] + f[1] * f[1]).sqrt();
            assert!((ind.radial_support(th) - r).abs() < 1e-14);
        }
    }

    #[test]
    fn coincident_at_unit_speed_point() {
        let g = RandersMetric::new(quartic());
        let c = RandersMetric::new(quartic().classical());
        let a = sample_indicatrix(&c, Point2::new(0.0, 0.0), 64).unwrap();
        let b = sample_indicatrix(&g, Point2::new(0.0, 0.0), 64).unwrap();
        let rep = indicatrix_intersections(&a, &b).unwrap();
        assert!(rep.coincident);
        assert!(rep.crossings.is_empty());
    }

    #[test]
    fn nested_circles_are_contained() {
        let g = RandersMetric::new(quartic());
        let c = RandersMetric::new(quartic().classical());
        let p = Point2::new(0.0, 1.0);
        let a = sample_indicatrix(&c, p, 64).unwrap();
        let b = sample_indicatrix(&g, p, 64).unwrap();
        let rep = indicatrix_intersections(&a, &b).unwrap();
        assert!(!rep.coincident);
        assert!(rep.crossings.is_empty() && rep.touches.is_empty());
        assert_eq!(rep.containment, Some(Containment::SecondInsideFirst));
    }

    #[test]
    fn shifted_circles_cross_twice() {
        // unit circle about the origin against a unit circle shifted by 0.5
        let a = sample_indicatrix(&RandersMetric::new(flat()), Point2::new(0.0, 0.0), 64).unwrap();
        let shifted = flat().with_wind(VectorField {
            x: ScalarField::constant(0.5),
            y: ScalarField::constant(0.0),
        });
        let shifted = shifted.with_speed(ScalarField::constant(1.0));
        let b = sample_indicatrix(&RandersMetric::new(shifted), Point2::new(0.0, 0.0), 64);
        // wind 0.5 with unit speed is mild
        let b = b.unwrap();
        let rep = indicatrix_intersections(&a, &b).unwrap();
        assert_eq!(rep.crossings.len(), 2);
        // circles |t| = 1 and |t − (0.5, 0)| = 1 meet where t.x = 0.25
        let expect = (0.25f64).acos();
        assert!((rep.crossings[0] - expect).abs() < 1e-8);
        assert!((rep.crossings[1] - (TAU - expect)).abs() < 1e-8);
        assert_eq!(rep.containment, None);
    }

    #[test]
    fn tangent_circles_touch() {
        // radius 1 about the origin, radius 0.75 about (0.25, 0): internal tangency at θ = 0
        let a = sample_indicatrix(&RandersMetric::new(flat()), Point2::new(0.0, 0.0), 64).unwrap();
        let inner = flat()
            .with_wind(VectorField {
                x: ScalarField::constant(0.25),
                y: ScalarField::constant(0.0),
            })
            .with_speed(ScalarField::constant(0.75));
        let b = sample_indicatrix(&RandersMetric::new(inner), Point2::new(0.0, 0.0), 64).unwrap();
        let rep = indicatrix_intersections(&a, &b).unwrap();
        assert!(rep.crossings.is_empty());
        assert_eq!(rep.touches.len(), 1);
        let t = rep.touches[0];
        assert!(t.min(TAU - t) < 1e-3);
        assert_eq!(rep.containment, Some(Containment::SecondInsideFirst));
    }

    #[test]
    fn flat_reachable_set_is_unit_circle() {
        let s = SprayField::from_data(flat());
        let rs = reachable_set(&s, Point2::new(0.0, 0.0), 1.0, &heading_grid(24), &StepControl::default())
            .unwrap();
        assert_eq!(rs.endpoints().len(), 24);
        assert!(rs.early_terminations().is_empty());
        for (_, p) in rs.endpoints() {
            assert!((p.distance(&Point2::new(0.0, 0.0)) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn polygon_helpers() {
        let sq = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        assert!(point_in_polygon(Point2::new(0.5, 0.5), &sq));
        assert!(!point_in_polygon(Point2::new(1.5, 0.5), &sq));
        assert_eq!(winding_number(Point2::new(0.5, 0.5), &sq), 1);
        let rev: Vec<Point2> = sq.iter().rev().copied().collect();
        assert_eq!(winding_number(Point2::new(0.5, 0.5), &rev), -1);
        // a figure-eight traced twice around its right lobe
        let loop2 = [
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 2.0),
            Point2::new(0.0, 2.0),
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 2.0),
            Point2::new(0.0, 2.0),
        ];
        assert_eq!(winding_number(Point2::new(1.0, 1.0), &loop2), 2);
        assert!(point_in_polygon(Point2::new(1.0, 1.0), &loop2));
        assert!((distance_to_polygon(Point2::new(0.5, 0.25), &sq) - 0.25).abs() < 1e-15);
        assert!((distance_to_polygon(Point2::new(2.0, 0.5), &sq) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn flat_shooting() {
        let s = SprayField::from_data(flat());
        let out = shoot_to_target(
            &s,
            Point2::new(0.0, 0.0),
            Point2::new(3.0, 4.0),
            1e-8,
            (0.0, TAU),
            &ShootingOptions::default(),
        )
        .unwrap();
        let r = out.found().expect("target reachable");
        assert!((r.phi0 - 4f64.atan2(3.0)).abs() < 1e-9);
        assert!((r.arrival_time - 5.0).abs() < 1e-8);
        assert!(r.position_error <= 1e-8);
    }

    #[test]
    fn unreachable_target_is_not_found() {
        let s = SprayField::from_data(flat());
        let out = shoot_to_target(
            &s,
            Point2::new(0.0, 0.0),
            Point2::new(30.0, 0.0),
            1e-8,
            (0.0, TAU),
            &ShootingOptions {
                horizon: 2.0,
                ..ShootingOptions::default()
            },
        )
        .unwrap();
        match out {
            ShootingOutcome::NotFound { best_distance, .. } => assert!(best_distance > 1.0),
            ShootingOutcome::Found(_) => panic!("target should be out of reach"),
        }
    }

    #[test]
    fn bracketed_shooting_respects_bracket() {
        let s = SprayField::from_data(flat());
        let out = shoot_to_target(
            &s,
            Point2::new(0.0, 0.0),
            Point2::new(-2.0, 0.0),
            1e-8,
            (-0.5, 0.5),
            &ShootingOptions::default(),
        )
        .unwrap();
        assert!(out.found().is_none());
        let out = shoot_to_target(
            &s,
            Point2::new(0.0, 0.0),
            Point2::new(-2.0, 0.0),
            1e-8,
            (PI - 0.5, PI + 0.5),
            &ShootingOptions::default(),
        )
        .unwrap();
        assert!((out.found().unwrap().phi0 - PI).abs() < 1e-9);
    }

    #[test]
    fn axis_comparison_is_equal_on_unit_locus() {
        let cmp = lemma_transit_comparison(
            &quartic(),
            Point2::new(0.0, 0.0),
            Point2::new(9.0, 0.0),
            1e-8,
            &ShootingOptions::default(),
        )
        .unwrap();
        assert_eq!(cmp.flag, LemmaFlag::EqualOnUnitSpeedLocus);
        assert!((cmp.t_classical.unwrap() - 5.0).abs() < 1e-6);
        assert!((cmp.t_generalized.unwrap() - 5.0).abs() < 1e-6);
    }
}
