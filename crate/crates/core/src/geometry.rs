//! Navigation data on a 2D chart: background metric, current and ship speed.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expr, ParseError};
use crate::jet::{Jet, Real};

/// Position in chart coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Tangent vector with components `(u, v)` along the coordinate directions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tangent2 {
    pub u: f64,
    pub v: f64,
}

impl Tangent2 {
    pub const ZERO: Tangent2 = Tangent2 { u: 0.0, v: 0.0 };

    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn is_zero(&self) -> bool {
        self.u == 0.0 && self.v == 0.0
    }

    pub fn scale(self, c: f64) -> Self {
        Self::new(self.u * c, self.v * c)
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.u.hypot(self.v)
    }
}

/// A scalar field given by a closed-form expression, with its source text.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    expr: Expr,
    source: String,
}

impl ScalarField {
    pub fn parse(src: &str) -> std::result::Result<Self, ParseError> {
        Self::parse_with(src, &BTreeMap::new())
    }

    pub fn parse_with(
        src: &str,
        constants: &BTreeMap<String, f64>,
    ) -> std::result::Result<Self, ParseError> {
        Ok(Self {
            expr: Expr::parse_with(src, constants)?,
            source: src.to_string(),
        })
    }

    pub fn constant(c: f64) -> Self {
        Self {
            expr: Expr::Num(c),
            source: format!("{c}"),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn eval<R: Real>(&self, x: R, y: R) -> R {
        self.expr.eval(x, y)
    }

    pub fn value(&self, p: Point2) -> f64 {
        self.expr.eval(p.x, p.y)
    }

    /// Value and exact gradient `(∂/∂x, ∂/∂y)`.
    pub fn value_grad(&self, p: Point2) -> (f64, [f64; 2]) {
        let j: Jet<2> = self
            .expr
            .eval(Jet::variable(p.x, 0), Jet::variable(p.y, 1));
        (j.val, j.grad)
    }
}

/// Current (wind) field `W = (W¹, W²)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub x: ScalarField,
    pub y: ScalarField,
}

impl VectorField {
    pub fn zero() -> Self {
        Self {
            x: ScalarField::constant(0.0),
            y: ScalarField::constant(0.0),
        }
    }

    pub fn at(&self, p: Point2) -> Tangent2 {
        Tangent2::new(self.x.value(p), self.y.value(p))
    }
}

/// Symmetric 2×2 matrix, used for metric values at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sym2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl Sym2 {
    pub const IDENTITY: Sym2 = Sym2 {
        a11: 1.0,
        a12: 0.0,
        a22: 1.0,
    };

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    pub fn is_positive_definite(&self) -> bool {
        self.a11 > 0.0 && self.det() > 0.0
    }

    pub fn bilinear(&self, a: Tangent2, b: Tangent2) -> f64 {
        self.a11 * a.u * b.u + self.a12 * (a.u * b.v + a.v * b.u) + self.a22 * a.v * b.v
    }

    pub fn quad(&self, t: Tangent2) -> f64 {
        self.bilinear(t, t)
    }

    /// Lowers an index: `(a_{1j} tʲ, a_{2j} tʲ)`.
    pub fn lower(&self, t: Tangent2) -> [f64; 2] {
        [
            self.a11 * t.u + self.a12 * t.v,
            self.a12 * t.u + self.a22 * t.v,
        ]
    }

    pub fn inverse(&self) -> Sym2 {
        let d = self.det();
        Sym2 {
            a11: self.a22 / d,
            a12: -self.a12 / d,
            a22: self.a11 / d,
        }
    }
}

/// Orthonormal frame of a positive definite form, from its Cholesky factor
/// `h = L Lᵀ`. The first frame vector points along the `x` coordinate axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    l11: f64,
    l21: f64,
    l22: f64,
}

impl Frame {
    pub fn from_metric(h: &Sym2) -> Option<Self> {
        if !h.is_positive_definite() {
            return None;
        }
        let l11 = h.a11.sqrt();
        let l21 = h.a12 / l11;
        let l22 = (h.a22 - l21 * l21).sqrt();
        Some(Self { l11, l21, l22 })
    }

    /// Coordinate vector with frame components `c`.
    pub fn to_coords(&self, c: [f64; 2]) -> Tangent2 {
        let v = c[1] / self.l22;
        let u = (c[0] - self.l21 * v) / self.l11;
        Tangent2::new(u, v)
    }

    /// Frame components of the coordinate vector `t`.
    pub fn to_frame(&self, t: Tangent2) -> [f64; 2] {
        [self.l11 * t.u + self.l21 * t.v, self.l22 * t.v]
    }
}

/// Background Riemannian metric `h` as three component fields.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricField {
    pub h11: ScalarField,
    pub h12: ScalarField,
    pub h22: ScalarField,
}

impl MetricField {
    pub fn euclidean() -> Self {
        Self {
            h11: ScalarField::constant(1.0),
            h12: ScalarField::constant(0.0),
            h22: ScalarField::constant(1.0),
        }
    }

    pub fn at(&self, p: Point2) -> Sym2 {
        Sym2 {
            a11: self.h11.value(p),
            a12: self.h12.value(p),
            a22: self.h22.value(p),
        }
    }
}

/// Axis-aligned rectangle of validity (closed).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.x_max > self.x_min && self.y_max > self.y_min)
    }
}

/// Why a sample point fails the mild-wind / speed-cap condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// `|W|ₕ ≥ speed`
    WindNotMild,
    /// `speed > 1`
    SpeedAboveCap,
    /// `speed ≤ 0`
    NonPositiveSpeed,
    /// `h` is not positive definite.
    MetricNotPositiveDefinite,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub point: Point2,
    pub wind_norm: f64,
    pub speed: f64,
    pub kinds: Vec<ViolationKind>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexityReport {
    pub samples: usize,
    pub violations: Vec<Violation>,
}

impl ConvexityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A line segment parallel to a coordinate axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LineSlice {
    /// `x` fixed, `y` ranging over `[lo, hi]`.
    Vertical { x: f64, lo: f64, hi: f64 },
    /// `y` fixed, `x` ranging over `[lo, hi]`.
    Horizontal { y: f64, lo: f64, hi: f64 },
}

impl LineSlice {
    fn point(&self, s: f64) -> Point2 {
        match *self {
            LineSlice::Vertical { x, .. } => Point2::new(x, s),
            LineSlice::Horizontal { y, .. } => Point2::new(s, y),
        }
    }

    fn range(&self) -> (f64, f64) {
        match *self {
            LineSlice::Vertical { lo, hi, .. } | LineSlice::Horizontal { lo, hi, .. } => (lo, hi),
        }
    }
}

const BOUNDARY_SUBDIVISIONS: usize = 1024;
const BOUNDARY_TOL: f64 = 1e-10;

/// The triple `(h, W, |u|ₕ)` together with its rectangle of validity.
#[derive(Clone, Debug, PartialEq)]
pub struct NavigationData {
    pub metric: MetricField,
    pub wind: VectorField,
    pub speed: ScalarField,
    pub domain: Rect,
}

impl NavigationData {
    pub fn new(metric: MetricField, wind: VectorField, speed: ScalarField, domain: Rect) -> Self {
        Self {
            metric,
            wind,
            speed,
            domain,
        }
    }

    /// Euclidean background, current `a (b − y²)² ∂/∂x` and ship speed `cos y`,
    /// restricted to `|y| ≤ 1.25`.
    pub fn quartic_current(a: f64, b: f64) -> Self {
        let mut c = BTreeMap::new();
        c.insert("a".to_string(), a);
        c.insert("b".to_string(), b);
        let w1 = ScalarField::parse_with("a*(b - y^2)^2", &c).expect("valid expression");
        Self {
            metric: MetricField::euclidean(),
            wind: VectorField {
                x: w1,
                y: ScalarField::constant(0.0),
            },
            speed: ScalarField::parse("cos(y)").expect("valid expression"),
            domain: Rect::new(-20.0, 20.0, -1.25, 1.25),
        }
    }

    /// Same background and current, ship speed fixed at one.
    pub fn classical(&self) -> Self {
        self.with_speed(ScalarField::constant(1.0))
    }

    pub fn with_speed(&self, speed: ScalarField) -> Self {
        Self {
            speed,
            ..self.clone()
        }
    }

    pub fn with_wind(&self, wind: VectorField) -> Self {
        Self {
            wind,
            ..self.clone()
        }
    }

    pub fn with_domain(&self, domain: Rect) -> Self {
        Self {
            domain,
            ..self.clone()
        }
    }

    fn check_domain(&self, p: Point2) -> Result<()> {
        if self.domain.contains(p) {
            Ok(())
        } else {
            Err(Error::OutsideDomain { x: p.x, y: p.y })
        }
    }

    pub fn h_at(&self, p: Point2) -> Sym2 {
        self.metric.at(p)
    }

    pub fn h_norm(&self, p: Point2, t: Tangent2) -> Result<f64> {
        Ok(self.h_inner(p, t, t)?.max(0.0).sqrt())
    }

    pub fn h_inner(&self, p: Point2, a: Tangent2, b: Tangent2) -> Result<f64> {
        self.check_domain(p)?;
        Ok(self.h_at(p).bilinear(a, b))
    }

    /// `|W(p)|ₕ`, without a domain check.
    pub fn wind_norm(&self, p: Point2) -> f64 {
        self.h_at(p).quad(self.wind.at(p)).max(0.0).sqrt()
    }

    /// h-orthonormal frame at `p`.
    pub fn frame(&self, p: Point2) -> Result<Frame> {
        Frame::from_metric(&self.h_at(p)).ok_or(Error::NotPositiveDefinite { x: p.x, y: p.y })
    }

    /// Samples the domain on a `grid × grid` lattice (edges included) and
    /// reports every point where `|W|ₕ < speed ≤ 1` fails.
    pub fn validate_convexity(&self, grid: usize) -> Result<ConvexityReport> {
        if grid < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid resolution must be at least 2, got {grid}"
            )));
        }
        let r = self.domain;
        let mut violations = Vec::new();
        for j in 0..grid {
            let y = lerp(r.y_min, r.y_max, j, grid);
            for i in 0..grid {
                let p = Point2::new(lerp(r.x_min, r.x_max, i, grid), y);
                if let Some(v) = self.check_point(p) {
                    violations.push(v);
                }
            }
        }
        Ok(ConvexityReport {
            samples: grid * grid,
            violations,
        })
    }

    fn check_point(&self, p: Point2) -> Option<Violation> {
        let h = self.h_at(p);
        let speed = self.speed.value(p);
        let wind_norm = h.quad(self.wind.at(p)).max(0.0).sqrt();
        let mut kinds = Vec::new();
        if !h.is_positive_definite() {
            kinds.push(ViolationKind::MetricNotPositiveDefinite);
        }
        // NaN comparisons fall through to a violation
        if !(wind_norm < speed) {
            kinds.push(ViolationKind::WindNotMild);
        }
        if speed > 1.0 {
            kinds.push(ViolationKind::SpeedAboveCap);
        }
        if !(speed > 0.0) {
            kinds.push(ViolationKind::NonPositiveSpeed);
        }
        (!kinds.is_empty()).then_some(Violation {
            point: p,
            wind_norm,
            speed,
            kinds,
        })
    }

    /// `speed(p) − |W(p)|ₕ`.
    pub fn convexity_margin(&self, p: Point2) -> f64 {
        self.speed.value(p) - self.wind_norm(p)
    }

    /// Roots of `speed − |W|ₕ` along `slice`, each bracketed on a uniform
    /// subdivision and refined by bisection.
    pub fn convexity_boundary(&self, slice: &LineSlice) -> Vec<f64> {
        let (lo, hi) = slice.range();
        let f = |s: f64| self.convexity_margin(slice.point(s));
        let n = BOUNDARY_SUBDIVISIONS;
        let mut roots = Vec::new();
        let mut a = lo;
        let mut fa = f(a);
        if fa == 0.0 {
            roots.push(a);
        }
        for k in 1..=n {
            let b = lerp(lo, hi, k, n + 1);
            let fb = f(b);
            if fb == 0.0 {
                roots.push(b);
            } else if fa != 0.0 && fa.signum() != fb.signum() {
                roots.push(bisect(&f, a, b, fa));
            }
            a = b;
            fa = fb;
        }
        roots
    }
}

fn lerp(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    if i + 1 == n {
        hi
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

pub(crate) fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= BOUNDARY_TOL * 1e-3 || m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
