//! Cross-checks against reference implementations that share no code with
//! the library's metric, spray or integrator.

mod common;

use std::f64::consts::PI;

use common::*;
use zermelo::geometry::LineSlice;
use zermelo::ode::{StepControl, Tolerance};
use zermelo::spray::{heading_grid, integrate_fan, spray_from_jet, InitialCondition, SprayField, Termination};
use zermelo::{Point2, RandersMetric, ScalarField, Tangent2, VectorField};

#[test]
fn exact_jet_matches_finite_differences() {
    let m = RandersMetric::new(quartic());
    let mut r = rng(11);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let p = random_point(&mut r);
        let t = random_tangent(&mut r);
        let exact = m.jet(p, t).unwrap().as_array();
        let fd = fd_jet(&m, p, t).as_array();
        let scale = exact.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for (e, f) in exact.iter().zip(&fd) {
            worst = worst.max((e - f).abs() / scale);
        }
    }
    assert!(worst < 1e-6, "worst scaled jet error {worst:e}");
}

#[test]
fn spray_matches_finite_difference_spray() {
    let m = RandersMetric::new(quartic());
    let spray = SprayField::new(m.clone());
    let mut r = rng(12);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let p = random_point(&mut r);
        let t = random_tangent(&mut r);
        let g = spray.coefficients(p, t).unwrap();
        let o = spray_from_jet(&fd_jet(&m, p, t), t).unwrap();
        let norm = (o[0].hypot(o[1])).max(1e-3 * (t.u * t.u + t.v * t.v));
        worst = worst.max((g[0] - o[0]).hypot(g[1] - o[1]) / norm);
    }
    assert!(worst < 1e-5, "worst relative spray error {worst:e}");
}

#[test]
fn spray_golden_values() {
    // reference values from a symbolic differentiation of ½F² in a CAS
    let spray = SprayField::from_data(quartic());
    let g = spray
        .coefficients(Point2::new(0.0, 0.5), Tangent2::new(1.0, 0.0))
        .unwrap();
    assert!(g[0].abs() < 1e-15);
    assert!(rel_err(g[1], -0.418_114_918_835_099_8, 1.0) < 1e-13);
    let g = spray
        .coefficients(Point2::new(0.3, -0.7), Tangent2::new(0.2, -0.9))
        .unwrap();
    assert!(rel_err(g[0], 0.572_974_016_280_127_3, 1.0) < 1e-13);
    assert!(rel_err(g[1], -0.340_344_278_979_515_5, 1.0) < 1e-13);
    // and the finite-difference oracle agrees
    let m = RandersMetric::new(quartic());
    let t = Tangent2::new(1.0, 0.0);
    let o = spray_from_jet(&fd_jet(&m, Point2::new(0.0, 0.5), t), t).unwrap();
    assert!(rel_err(o[1], -0.418_114_918_835_099_8, 1.0) < 1e-6);
}

#[test]
fn convexity_boundary_matches_bisection_oracle() {
    let oracle = boundary_root_bisection();
    assert!((oracle - 1.268_767_879_436_607_1).abs() < 1e-12);
    let data = quartic().with_domain(zermelo::Rect::new(-1.0, 1.0, -1.5, 1.5));
    let roots = data.convexity_boundary(&LineSlice::Vertical {
        x: 0.0,
        lo: 0.0,
        hi: 1.5,
    });
    assert_eq!(roots.len(), 1);
    assert!((roots[0] - oracle).abs() < 1e-10);
    // unit speed moves the boundary out
    let roots = data.classical().convexity_boundary(&LineSlice::Vertical {
        x: 0.0,
        lo: 0.0,
        hi: 1.5,
    });
    assert!((roots[0] - 1.455_346_690_225_354_8).abs() < 1e-10);
}

#[test]
fn conformal_case_matches_christoffel_integrator() {
    let data = quartic().with_wind(VectorField::zero());
    let spray = SprayField::from_data(data);
    let p0 = Point2::new(0.0, 0.5);
    let steps = 4000;
    let mut worst: f64 = 0.0;
    for phi in heading_grid(16) {
        let ic = InitialCondition::new(spray.metric(), p0, phi).unwrap();
        let tr = zermelo::spray::integrate_geodesic(&spray, &ic, 2.0, &StepControl::default()).unwrap();
        let oracle = conformal_geodesic(p0, phi, 2.0, steps);
        for (k, z) in oracle.iter().enumerate().step_by(50) {
            let time = 2.0 * k as f64 / steps as f64;
            let Some(s) = tr.state_at(time) else { break };
            worst = worst.max((s.p.x - z[0]).hypot(s.p.y - z[1]));
        }
    }
    assert!(worst <= 1e-6, "conformal mismatch {worst:e}");
}

#[test]
fn fans_match_maximum_principle() {
    let tight = StepControl::with_tolerance(Tolerance {
        rtol: 1e-12,
        atol: 1e-14,
    });
    let o = Point2::new(0.0, 0.0);
    for (unit, data) in [(false, quartic()), (true, quartic().classical())] {
        let spray = SprayField::from_data(data);
        let phis = heading_grid(36);
        let steps = 20000;
        for (tr, phi) in integrate_fan(&spray, o, &phis, 5.0, &StepControl::default())
            .into_iter()
            .zip(&phis)
        {
            let tr = tr.unwrap();
            let oracle = pontryagin_path(o, *phi, 5.0, steps, unit);
            let end = tr.final_state();
            let k = (end.time / 5.0 * steps as f64).round() as usize;
            if (k as f64 * 5.0 / steps as f64 - end.time).abs() > 1e-12 {
                // compare only at oracle nodes
                let kk = k.saturating_sub(1);
                let s = tr.state_at(kk as f64 * 5.0 / steps as f64).unwrap();
                let z = oracle[kk];
                assert!((s.p.x - z[0]).hypot(s.p.y - z[1]) < 1e-6, "phi {phi}");
            } else {
                let z = oracle[k];
                assert!((end.p.x - z[0]).hypot(end.p.y - z[1]) < 1e-6, "phi {phi}");
            }
        }
        // tighter run of the classical metric against the same oracle
        if unit {
            for phi in [0.3, 1.2, 2.5, 4.0] {
                let ic = InitialCondition::new(spray.metric(), o, phi).unwrap();
                let tr = zermelo::spray::integrate_geodesic(&spray, &ic, 1.0, &tight).unwrap();
                assert_eq!(tr.termination, Termination::TimeReached);
                let z = *pontryagin_path(o, phi, 1.0, 4000, true).last().unwrap();
                let e = tr.final_state();
                assert!((e.p.x - z[0]).hypot(e.p.y - z[1]) < 1e-8, "phi {phi}");
            }
        }
    }
}

#[test]
fn constant_speed_rescales_time() {
    // with no current, speed c traces the unit-speed curves at rate c
    let flat = quartic()
        .with_wind(VectorField::zero())
        .with_speed(ScalarField::constant(1.0))
        .with_domain(zermelo::Rect::new(-5.0, 5.0, -5.0, 5.0));
    let slow = flat.with_speed(ScalarField::constant(0.5));
    let (s1, s2) = (SprayField::from_data(flat), SprayField::from_data(slow));
    let p0 = Point2::new(0.2, -0.3);
    for phi in [0.0, 1.0, PI, 5.0] {
        let a = zermelo::spray::integrate_geodesic(
            &s1,
            &InitialCondition::new(s1.metric(), p0, phi).unwrap(),
            1.0,
            &StepControl::default(),
        )
        .unwrap();
        let b = zermelo::spray::integrate_geodesic(
            &s2,
            &InitialCondition::new(s2.metric(), p0, phi).unwrap(),
            2.0,
            &StepControl::default(),
        )
        .unwrap();
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            let pa = a.state_at(t).unwrap().p;
            let pb = b.state_at(2.0 * t).unwrap().p;
            assert!(pa.distance(&pb) <= 1e-8);
            let chord = Point2::new(p0.x + t * phi.cos(), p0.y + t * phi.sin());
            assert!(pa.distance(&chord) <= 1e-8);
        }
    }
}

#[test]
fn fan_endpoints_match_golden_table() {
    // endpoints of the 18-heading fan at t = 5, frozen after the maximum
    // principle cross-check above
    let golden = include_str!("golden/fan_t5.csv");
    let mut rows = csv::Reader::from_reader(golden.as_bytes());
    let mut expected = Vec::new();
    for rec in rows.records() {
        let rec = rec.unwrap();
        let f = |i: usize| rec[i].parse::<f64>().unwrap();
        expected.push((rec[0].to_string(), f(1), rec[2].to_string(), f(3), f(4), f(5)));
    }
    assert_eq!(expected.len(), 36);
    let o = Point2::new(0.0, 0.0);
    let phis = heading_grid(18);
    let mut got = Vec::new();
    for (tag, data) in [("classical", quartic().classical()), ("generalized", quartic())] {
        let spray = SprayField::from_data(data);
        for tr in integrate_fan(&spray, o, &phis, 5.0, &StepControl::default()) {
            got.push((tag, tr.unwrap()));
        }
    }
    for ((tag, tr), (etag, ephi, eterm, et, ex, ey)) in got.iter().zip(&expected) {
        assert_eq!(tag, etag);
        assert_eq!(tr.initial.phi0, *ephi);
        assert_eq!(tr.termination.as_str(), eterm);
        let e = tr.final_state();
        assert!((e.time - et).abs() < 1e-9, "{tag} {ephi}");
        assert!((e.p.x - ex).abs() < 1e-9 && (e.p.y - ey).abs() < 1e-9, "{tag} {ephi}");
    }
}

#[test]
fn upstream_fan_refocuses_but_downstream_does_not() {
    // neighbouring upstream rays swap sides of the axis; downstream rays keep
    // their order
    let spray = SprayField::from_data(quartic());
    let phis = heading_grid(36);
    let fan: Vec<_> = integrate_fan(&spray, Point2::new(0.0, 0.0), &phis, 5.0, &StepControl::default())
        .into_iter()
        .map(|t| t.unwrap())
        .collect();
    let upstream = fan
        .iter()
        .filter(|t| t.termination == Termination::TimeReached)
        .filter(|t| t.initial.phi0 > PI / 2.0 && t.initial.phi0 < PI)
        .any(|t| t.final_state().p.y < 0.0);
    assert!(upstream);
    for t in fan.iter().filter(|t| t.initial.phi0 > 0.0 && t.initial.phi0 < PI / 2.0) {
        assert!(t.samples.iter().skip(1).all(|s| s.p.y > 0.0));
    }
}
