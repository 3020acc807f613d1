//! The Randers metric induced by navigation data with variable ship speed.
//!
//! For background metric `h`, current `W` and ship speed `s = |u|ₕ`, the
//! travel-time norm of a tangent vector `y` is
//!
//! ```text
//! F(y) = ( sqrt(h(W,y)² + |y|ₕ² λ) − h(W,y) ) / λ,    λ = s² − |W|ₕ²
//! ```
//!
//! which splits as `F = α + β` with `α² = ã(y, y)` and `β = b̃(y)`.

use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::geometry::{NavigationData, Point2, Sym2, Tangent2};
use crate::jet::{Jet, Real};

/// Rounding slack on the square-root argument before it counts as a
/// genuine convexity violation.
pub const DISCRIMINANT_SLACK: f64 = 1e-14;

/// Magnitude of the travel velocity for a heading at angle `theta` to the
/// current, given `|W|ₕ` and the ship speed.
pub fn resultant_speed(wind_norm: f64, speed: f64, theta: f64) -> Result<f64> {
    if !(wind_norm < speed) {
        return Err(Error::Convexity {
            x: f64::NAN,
            y: f64::NAN,
            lambda: speed * speed - wind_norm * wind_norm,
        });
    }
    let p = wind_norm * theta.cos();
    Ok(p + (p * p + speed * speed - wind_norm * wind_norm).sqrt())
}

/// Field values `h`, `W`, `s` at one point, over any scalar type.
#[derive(Clone, Copy, Debug)]
struct Fields<R> {
    h11: R,
    h12: R,
    h22: R,
    w1: R,
    w2: R,
    s: R,
}

impl<R: Real> Fields<R> {
    fn eval(data: &NavigationData, x: R, y: R) -> Self {
        Self {
            h11: data.metric.h11.eval(x, y),
            h12: data.metric.h12.eval(x, y),
            h22: data.metric.h22.eval(x, y),
            w1: data.wind.x.eval(x, y),
            w2: data.wind.y.eval(x, y),
            s: data.speed.eval(x, y),
        }
    }

    fn lowered_wind(&self) -> (R, R) {
        (
            self.h11 * self.w1 + self.h12 * self.w2,
            self.h12 * self.w1 + self.h22 * self.w2,
        )
    }

    fn lambda(&self) -> R {
        let (l1, l2) = self.lowered_wind();
        self.s * self.s - (l1 * self.w1 + l2 * self.w2)
    }

    /// Travel-time norm of `(u, v)`.
    fn norm(&self, u: R, v: R, p: Point2) -> Result<R> {
        let lam = self.lambda();
        if !(lam.value() > 0.0) {
            return Err(Error::Convexity {
                x: p.x,
                y: p.y,
                lambda: lam.value(),
            });
        }
        let (l1, l2) = self.lowered_wind();
        let hwy = l1 * u + l2 * v;
        let yy = self.h11 * u * u + self.h12 * u * v * 2.0 + self.h22 * v * v;
        let mut disc = hwy * hwy + yy * lam;
        if disc.value() < 0.0 {
            if disc.value() < -DISCRIMINANT_SLACK {
                return Err(Error::Convexity {
                    x: p.x,
                    y: p.y,
                    lambda: lam.value(),
                });
            }
            disc = R::constant(0.0);
        }
        Ok((disc.sqrt() - hwy) / lam)
    }

    fn metric(&self) -> Sym2 {
        Sym2 {
            a11: self.h11.value(),
            a12: self.h12.value(),
            a22: self.h22.value(),
        }
    }
}

/// Whether field values are memoised for the most recently evaluated point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CachePolicy {
    #[default]
    None,
    PerPoint,
}

#[derive(Default)]
struct Memo {
    plain: Option<((u64, u64), Fields<f64>)>,
    jets: Option<((u64, u64), Fields<Jet<4>>)>,
}

fn key(p: Point2) -> (u64, u64) {
    (p.x.to_bits(), p.y.to_bits())
}

/// `(ã, b̃, λ̃)` at a base point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandersDecomposition {
    pub a_tilde: Sym2,
    pub b_tilde: [f64; 2],
    pub lambda_tilde: f64,
}

impl RandersDecomposition {
    pub fn alpha(&self, t: Tangent2) -> f64 {
        self.a_tilde.quad(t).max(0.0).sqrt()
    }

    pub fn beta(&self, t: Tangent2) -> f64 {
        self.b_tilde[0] * t.u + self.b_tilde[1] * t.v
    }

    pub fn evaluate(&self, t: Tangent2) -> f64 {
        self.alpha(t) + self.beta(t)
    }

    /// `‖b̃‖` measured with the inverse of `ã`.
    pub fn b_norm(&self) -> f64 {
        let inv = self.a_tilde.inverse();
        let b = Tangent2::new(self.b_tilde[0], self.b_tilde[1]);
        inv.quad(b).max(0.0).sqrt()
    }
}

/// The rescaled current `W / |u|ₕ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveWind {
    pub components: Tangent2,
    /// `|W̃|ₕ`
    pub norm: f64,
}

impl EffectiveWind {
    /// `|W̃|ₕ < 1`, the mild-wind condition of the equivalent unit-speed problem.
    pub fn is_mild(&self) -> bool {
        self.norm < 1.0
    }
}

/// `L = ½F²` and the partial derivatives the spray needs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecondOrderJet {
    pub value: f64,
    pub l_x: f64,
    pub l_y: f64,
    pub l_u: f64,
    pub l_v: f64,
    pub l_uu: f64,
    pub l_uv: f64,
    pub l_vv: f64,
    pub l_xu: f64,
    pub l_xv: f64,
    pub l_yu: f64,
    pub l_yv: f64,
}

impl SecondOrderJet {
    /// Determinant of the fundamental form `L_uu L_vv − L_uv²`.
    pub fn fundamental_det(&self) -> f64 {
        self.l_uu * self.l_vv - self.l_uv * self.l_uv
    }

    pub fn as_array(&self) -> [f64; 12] {
        [
            self.value, self.l_x, self.l_y, self.l_u, self.l_v, self.l_uu, self.l_uv, self.l_vv,
            self.l_xu, self.l_xv, self.l_yu, self.l_yv,
        ]
    }
}

impl From<Jet<4>> for SecondOrderJet {
    fn from(j: Jet<4>) -> Self {
        // variable order: x, y, u, v
        Self {
            value: j.val,
            l_x: j.grad[0],
            l_y: j.grad[1],
            l_u: j.grad[2],
            l_v: j.grad[3],
            l_uu: j.hess[2][2],
            l_uv: j.hess[2][3],
            l_vv: j.hess[3][3],
            l_xu: j.hess[0][2],
            l_xv: j.hess[0][3],
            l_yu: j.hess[1][2],
            l_yv: j.hess[1][3],
        }
    }
}

/// Travel-time Finsler metric of a navigation problem.
pub struct RandersMetric {
    data: NavigationData,
    policy: CachePolicy,
    memo: Mutex<Memo>,
}

impl Clone for RandersMetric {
    fn clone(&self) -> Self {
        Self::with_cache(self.data.clone(), self.policy)
    }
}

impl std::fmt::Debug for RandersMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RandersMetric")
            .field("data", &self.data)
            .field("policy", &self.policy)
            .finish()
    }
}

impl RandersMetric {
    pub fn new(data: NavigationData) -> Self {
        Self::with_cache(data, CachePolicy::None)
    }

    pub fn with_cache(data: NavigationData, policy: CachePolicy) -> Self {
        Self {
            data,
            policy,
            memo: Mutex::new(Memo::default()),
        }
    }

    pub fn data(&self) -> &NavigationData {
        &self.data
    }

    fn fields(&self, p: Point2) -> Fields<f64> {
        if self.policy == CachePolicy::None {
            return Fields::eval(&self.data, p.x, p.y);
        }
        let k = key(p);
        let mut memo = self.memo.lock().expect("memo lock poisoned");
        match memo.plain {
            Some((mk, f)) if mk == k => f,
            _ => {
                let f = Fields::eval(&self.data, p.x, p.y);
                memo.plain = Some((k, f));
                f
            }
        }
    }

    fn field_jets(&self, p: Point2) -> Fields<Jet<4>> {
        let eval = || Fields::eval(&self.data, Jet::variable(p.x, 0), Jet::variable(p.y, 1));
        if self.policy == CachePolicy::None {
            return eval();
        }
        let k = key(p);
        let mut memo = self.memo.lock().expect("memo lock poisoned");
        match memo.jets {
            Some((mk, f)) if mk == k => f,
            _ => {
                let f = eval();
                memo.jets = Some((k, f));
                f
            }
        }
    }

    /// `|v|ₕ` for a heading at angle `theta` to the current at `p`.
    pub fn resultant_speed(&self, p: Point2, theta: f64) -> Result<f64> {
        let f = self.fields(p);
        let h = f.metric();
        let w = Tangent2::new(f.w1, f.w2);
        let wn = h.quad(w).max(0.0).sqrt();
        resultant_speed(wn, f.s, theta).map_err(|e| match e {
            Error::Convexity { lambda, .. } => Error::Convexity {
                x: p.x,
                y: p.y,
                lambda,
            },
            other => other,
        })
    }

    /// `F̃(p, t)`.
    pub fn evaluate(&self, p: Point2, t: Tangent2) -> Result<f64> {
        if !(p.is_finite() && t.u.is_finite() && t.v.is_finite()) {
            return Err(Error::NonFinite { x: p.x, y: p.y });
        }
        self.fields(p).norm(t.u, t.v, p)
    }

    /// `λ̃ = s² − |W|ₕ²` at `p`.
    pub fn lambda(&self, p: Point2) -> f64 {
        self.fields(p).lambda()
    }

    pub fn decompose(&self, p: Point2) -> Result<RandersDecomposition> {
        let f = self.fields(p);
        let lam = f.lambda();
        if !(lam > 0.0) {
            return Err(Error::Convexity {
                x: p.x,
                y: p.y,
                lambda: lam,
            });
        }
        let (w1, w2) = f.lowered_wind();
        let l2 = lam * lam;
        Ok(RandersDecomposition {
            a_tilde: Sym2 {
                a11: f.h11 / lam + w1 * w1 / l2,
                a12: f.h12 / lam + w1 * w2 / l2,
                a22: f.h22 / lam + w2 * w2 / l2,
            },
            b_tilde: [-w1 / lam, -w2 / lam],
            lambda_tilde: lam,
        })
    }

    pub fn effective_wind(&self, p: Point2) -> Result<EffectiveWind> {
        let f = self.fields(p);
        if !(f.s > 0.0) {
            return Err(Error::NonPositiveSpeed {
                x: p.x,
                y: p.y,
                speed: f.s,
            });
        }
        let components = Tangent2::new(f.w1 / f.s, f.w2 / f.s);
        let norm = f.metric().quad(components).max(0.0).sqrt();
        Ok(EffectiveWind { components, norm })
    }

    /// Exact value, gradient and the needed second derivatives of `½F̃²`.
    pub fn jet(&self, p: Point2, t: Tangent2) -> Result<SecondOrderJet> {
        if t.is_zero() {
            return Err(Error::DegenerateVector);
        }
        let f = self.field_jets(p);
        let u = Jet::variable(t.u, 2);
        let v = Jet::variable(t.v, 3);
        let norm = f.norm(u, v, p)?;
        let l = norm * norm * 0.5;
        let out = SecondOrderJet::from(l);
        if out.as_array().iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(Error::NonFinite { x: p.x, y: p.y })
        }
    }
}

/// Background metric and current recovered from a decomposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reconstruction {
    pub h: Sym2,
    /// Current components `Wⁱ`.
    pub wind: Tangent2,
    pub lambda_tilde: f64,
}

/// Inverts the decomposition for a given ship speed.
///
/// The metric alone fixes `(h, W)` only up to the family
/// `(c² h₀, W₀, c)`; the speed selects the member.
pub fn reconstruct_navigation(decomp: &RandersDecomposition, speed: f64) -> Result<Reconstruction> {
    if !(speed > 0.0 && speed <= 1.0) {
        return Err(Error::Reconstruction(format!(
            "speed {speed} outside (0, 1]"
        )));
    }
    if !decomp.a_tilde.is_positive_definite() {
        return Err(Error::Reconstruction("ã is not positive definite".into()));
    }
    let b2 = decomp.b_norm().powi(2);
    // ‖b̃‖² = |W|ₕ² / s², so λ̃ = s² (1 − ‖b̃‖²)
    let lam = speed * speed * (1.0 - b2);
    if !(lam > 0.0) {
        return Err(Error::Reconstruction(format!(
            "no positive λ̃: ‖b̃‖ = {}",
            b2.sqrt()
        )));
    }
    let w_low = [-lam * decomp.b_tilde[0], -lam * decomp.b_tilde[1]];
    let a = decomp.a_tilde;
    let h = Sym2 {
        a11: lam * a.a11 - w_low[0] * w_low[0] / lam,
        a12: lam * a.a12 - w_low[0] * w_low[1] / lam,
        a22: lam * a.a22 - w_low[1] * w_low[1] / lam,
    };
    if !h.is_positive_definite() {
        return Err(Error::Reconstruction(
            "recovered h is not positive definite".into(),
        ));
    }
    let hi = h.inverse();
    let wind = Tangent2::new(
        hi.a11 * w_low[0] + hi.a12 * w_low[1],
        hi.a12 * w_low[0] + hi.a22 * w_low[1],
    );
    Ok(Reconstruction {
        h,
        wind,
        lambda_tilde: lam,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{MetricField, Rect, ScalarField, VectorField};
    use std::f64::consts::PI;

    fn calm(speed: &str) -> NavigationData {
        NavigationData::new(
            MetricField::euclidean(),
            VectorField::zero(),
            ScalarField::parse(speed).unwrap(),
            Rect::new(-5.0, 5.0, -1.5, 1.5),
        )
    }

    fn quartic() -> RandersMetric {
        RandersMetric::new(NavigationData::quartic_current(0.8, 1.0))
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn resultant_speed_examples() {
        assert!((resultant_speed(0.8, 1.0, 0.0).unwrap() - 1.8).abs() < 1e-15);
        assert!((resultant_speed(0.8, 1.0, PI).unwrap() - 0.2).abs() < 1e-15);
        for k in 0..8 {
            let th = k as f64 * 0.7;
            assert_eq!(resultant_speed(0.0, 0.6, th).unwrap(), 0.6);
        }
        assert!(matches!(
            resultant_speed(1.0, 0.9, 0.0),
            Err(Error::Convexity { .. })
        ));
    }

    #[test]
    fn evaluate_examples() {
        let flat = RandersMetric::new(calm("1"));
        let o = Point2::new(0.0, 0.0);
        assert_eq!(flat.evaluate(o, Tangent2::new(3.0, 4.0)).unwrap(), 5.0);
        assert_eq!(flat.evaluate(o, Tangent2::ZERO).unwrap(), 0.0);

        let q = quartic();
        let f = q.evaluate(o, Tangent2::new(1.8, 0.0)).unwrap();
        assert!(rel(f, 1.0) < 1e-14, "{f}");
        let f = q.evaluate(Point2::new(0.0, 1.0), Tangent2::new(1.0, 0.0)).unwrap();
        assert!(rel(f, 1.0 / 1f64.cos()) < 1e-14);
    }

    #[test]
    fn evaluate_outside_convexity_fails() {
        let q = quartic();
        let r = q.evaluate(Point2::new(0.0, 1.3), Tangent2::new(1.0, 0.0));
        assert!(matches!(r, Err(Error::Convexity { .. })));
    }

    #[test]
    fn decompose_examples() {
        let o = Point2::new(0.0, 0.0);
        let d = RandersMetric::new(calm("1")).decompose(o).unwrap();
        assert_eq!(d.a_tilde, Sym2::IDENTITY);
        assert_eq!(d.b_tilde, [0.0, 0.0]);

        let p = Point2::new(0.3, 0.7);
        let d = RandersMetric::new(calm("cos(y)")).decompose(p).unwrap();
        let c2 = 0.7f64.cos().powi(2);
        assert!(rel(d.a_tilde.a11, 1.0 / c2) < 1e-14);
        assert!(rel(d.a_tilde.a22, 1.0 / c2) < 1e-14);
        assert_eq!(d.a_tilde.a12, 0.0);
        assert_eq!(d.b_tilde, [0.0, 0.0]);

        let d = quartic().decompose(o).unwrap();
        assert!(rel(d.lambda_tilde, 0.36) < 1e-14);
        assert!(rel(d.b_tilde[0], -0.8 / 0.36) < 1e-14);
        assert!(rel(d.a_tilde.a11, 1.0 / 0.36 + 0.64 / (0.36 * 0.36)) < 1e-14);
        assert!(rel(d.b_norm(), 0.8) < 1e-14);
    }

    #[test]
    fn effective_wind_examples() {
        let d = calm("1").with_wind(VectorField {
            x: ScalarField::constant(0.8),
            y: ScalarField::constant(0.0),
        });
        let o = Point2::new(0.0, 0.0);
        let w = RandersMetric::new(d.clone()).effective_wind(o).unwrap();
        assert_eq!(w.components, Tangent2::new(0.8, 0.0));
        assert!(w.is_mild());

        let slow = d.with_speed(ScalarField::constant(0.5));
        let w = RandersMetric::new(slow).effective_wind(o).unwrap();
        assert_eq!(w.components, Tangent2::new(1.6, 0.0));
        assert!(!w.is_mild());

        let w = RandersMetric::new(calm("0.3")).effective_wind(o).unwrap();
        assert_eq!(w.components, Tangent2::ZERO);

        let stopped = RandersMetric::new(calm("0"));
        assert!(matches!(
            stopped.effective_wind(o),
            Err(Error::NonPositiveSpeed { .. })
        ));
    }

    #[test]
    fn jet_flat_quadratic() {
        let j = RandersMetric::new(calm("1"))
            .jet(Point2::new(0.4, -0.2), Tangent2::new(0.6, 1.3))
            .unwrap();
        assert!((j.l_uu - 1.0).abs() < 1e-14);
        assert!((j.l_vv - 1.0).abs() < 1e-14);
        assert!(j.l_uv.abs() < 1e-14);
        for d in [j.l_x, j.l_y, j.l_xu, j.l_xv, j.l_yu, j.l_yv] {
            assert_eq!(d, 0.0);
        }
    }

    #[test]
    fn jet_conformal_hand_derivative() {
        let m = RandersMetric::new(calm("cos(y)"));
        for (x, y, u, v) in [(0.0, 0.4, 1.0, 0.5), (2.0, -0.9, -0.3, 0.8)] {
            let j = m.jet(Point2::new(x, y), Tangent2::new(u, v)).unwrap();
            let c2 = f64::cos(y).powi(2);
            let expected = (u * u + v * v) * f64::tan(y) / c2;
            assert!(rel(j.l_y, expected) < 1e-13);
            assert_eq!(j.l_x, 0.0);
            assert!(rel(j.l_uu, 1.0 / c2) < 1e-13);
            assert!(rel(j.l_yu, 2.0 * u * f64::tan(y) / c2) < 1e-13);
        }
    }

    #[test]
    fn jet_rejects_zero_vector() {
        assert_eq!(
            quartic().jet(Point2::new(0.0, 0.0), Tangent2::ZERO),
            Err(Error::DegenerateVector)
        );
    }

    #[test]
    fn reconstruct_examples() {
        let o = Point2::new(0.0, 0.0);
        let d = RandersMetric::new(calm("1")).decompose(o).unwrap();
        let r = reconstruct_navigation(&d, 1.0).unwrap();
        assert_eq!(r.h, Sym2::IDENTITY);
        assert_eq!(r.wind, Tangent2::ZERO);

        let d = quartic().decompose(o).unwrap();
        let r = reconstruct_navigation(&d, 1.0).unwrap();
        assert!(rel(r.wind.u, 0.8) < 1e-12);
        assert!(r.wind.v.abs() < 1e-15);
        assert!(rel(r.h.a11, 1.0) < 1e-12 && rel(r.h.a22, 1.0) < 1e-12);
        assert!(r.h.a12.abs() < 1e-15);

        let p = Point2::new(0.0, 1.0);
        let d = RandersMetric::new(calm("cos(y)")).decompose(p).unwrap();
        let r = reconstruct_navigation(&d, 1f64.cos()).unwrap();
        assert!(rel(r.h.a11, 1.0) < 1e-12 && rel(r.h.a22, 1.0) < 1e-12);
        assert!(rel(r.lambda_tilde, d.lambda_tilde) < 1e-12);
    }

    #[test]
    fn reconstruct_rejects_non_convex_input() {
        let d = RandersDecomposition {
            a_tilde: Sym2::IDENTITY,
            b_tilde: [1.2, 0.0],
            lambda_tilde: 1.0,
        };
        assert!(matches!(
            reconstruct_navigation(&d, 1.0),
            Err(Error::Reconstruction(_))
        ));
        let ok = RandersDecomposition {
            b_tilde: [0.1, 0.0],
            ..d
        };
        assert!(reconstruct_navigation(&ok, 1.5).is_err());
        assert!(reconstruct_navigation(&ok, 0.0).is_err());
    }

    #[test]
    fn per_point_cache_gives_identical_results() {
        let data = NavigationData::quartic_current(0.8, 1.0);
        let plain = RandersMetric::new(data.clone());
        let cached = RandersMetric::with_cache(data, CachePolicy::PerPoint);
        let p = Point2::new(0.2, 0.5);
        for t in [Tangent2::new(1.0, 0.0), Tangent2::new(-0.3, 0.9)] {
            assert_eq!(plain.evaluate(p, t), cached.evaluate(p, t));
            assert_eq!(plain.jet(p, t), cached.jet(p, t));
            assert_eq!(plain.jet(p, t), cached.jet(p, t));
        }
    }
}
