//! Minimal SVG 1.1 emitter for chart-coordinate plots.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{Point2, Rect};

/// Series classes and their stroke colours.
pub const CLASSICAL: &str = "classical";
pub const GENERALIZED: &str = "generalized";
pub const WIND: &str = "wind";

const STYLE: &str = "\
.classical{stroke:red;fill:none;stroke-width:1}\
.generalized{stroke:black;fill:none;stroke-width:1}\
.wind{stroke:blue;fill:blue;stroke-width:1}\
.boundary{stroke:gray;fill:none;stroke-dasharray:4 3}\
.contour{stroke:green;fill:none;stroke-width:0.75}\
.axis{stroke:#444;fill:none;stroke-width:0.75}\
.label{font:10px sans-serif;fill:#444}\
.dotted{stroke-dasharray:1 2}";

const MARGIN: f64 = 40.0;

#[derive(Clone, Debug, PartialEq)]
pub struct PlotSpec {
    /// Visible region in chart coordinates.
    pub extents: Rect,
    /// Drawing width in pixels, margins excluded.
    pub width: f64,
    /// Drawing height in pixels, margins excluded.
    pub height: f64,
    pub title: String,
}

impl PlotSpec {
    /// Width fixed at 720 px, height following the aspect ratio within
    /// `[240, 720]`.
    pub fn new(extents: Rect, title: &str) -> Result<Self> {
        if extents.is_degenerate() {
            return Err(Error::InvalidArgument("degenerate plot extents".into()));
        }
        let width = 720.0;
        let aspect = (extents.y_max - extents.y_min) / (extents.x_max - extents.x_min);
        Ok(Self {
            extents,
            width,
            height: (width * aspect).clamp(240.0, 720.0),
            title: title.to_string(),
        })
    }

    /// Smallest extents containing `points`, padded by `pad` on each side.
    pub fn fit(points: impl IntoIterator<Item = Point2>, pad: f64, title: &str) -> Result<Self> {
        let mut r = Rect::new(f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in points.into_iter().filter(|p| p.is_finite()) {
            r.x_min = r.x_min.min(p.x);
            r.x_max = r.x_max.max(p.x);
            r.y_min = r.y_min.min(p.y);
            r.y_max = r.y_max.max(p.y);
        }
        if !(r.x_max >= r.x_min && r.y_max >= r.y_min) {
            return Err(Error::InvalidArgument("nothing to plot".into()));
        }
        let dx = (r.x_max - r.x_min).max(1e-9) * pad;
        let dy = (r.y_max - r.y_min).max(1e-9) * pad;
        Self::new(
            Rect::new(r.x_min - dx, r.x_max + dx, r.y_min - dy, r.y_max + dy),
            title,
        )
    }
}

/// An SVG document under construction.
pub struct Svg {
    spec: PlotSpec,
    body: String,
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

impl Svg {
    pub fn new(spec: PlotSpec) -> Self {
        Self {
            spec,
            body: String::new(),
        }
    }

    pub fn spec(&self) -> &PlotSpec {
        &self.spec
    }

    fn px(&self, p: Point2) -> (f64, f64) {
        let r = self.spec.extents;
        (
            MARGIN + (p.x - r.x_min) / (r.x_max - r.x_min) * self.spec.width,
            MARGIN + (r.y_max - p.y) / (r.y_max - r.y_min) * self.spec.height,
        )
    }

    /// Open or closed polyline; non-finite points split it into pieces.
    pub fn polyline(&mut self, points: &[Point2], class: &str, closed: bool) {
        let mut runs: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        for p in points {
            if p.is_finite() {
                let q = self.px(*p);
                runs.last_mut().expect("non-empty").push(q);
            } else if !runs.last().expect("non-empty").is_empty() {
                runs.push(Vec::new());
            }
        }
        let whole = runs.len() == 1;
        for run in runs.into_iter().filter(|r| r.len() >= 2) {
            let pts: Vec<String> = run.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let tag = if closed && whole { "polygon" } else { "polyline" };
            let _ = writeln!(
                self.body,
                r#"<{tag} class="{class}" points="{}"/>"#,
                pts.join(" ")
            );
        }
    }

    pub fn circle(&mut self, center: Point2, radius_px: f64, class: &str) {
        if !center.is_finite() {
            return;
        }
        let (x, y) = self.px(center);
        let _ = writeln!(
            self.body,
            r#"<circle class="{class}" cx="{x:.2}" cy="{y:.2}" r="{radius_px:.2}"/>"#
        );
    }

    pub fn segment(&mut self, a: Point2, b: Point2, class: &str) {
        let (x1, y1) = self.px(a);
        let (x2, y2) = self.px(b);
        let _ = writeln!(
            self.body,
            r#"<line class="{class}" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#
        );
    }

    /// Arrow from `from` to `to` with a small head.
    pub fn arrow(&mut self, from: Point2, to: Point2, class: &str) {
        let (x1, y1) = self.px(from);
        let (x2, y2) = self.px(to);
        let (dx, dy) = (x2 - x1, y2 - y1);
        let len = (dx * dx + dy * dy).sqrt();
        if !(len > 0.5) {
            return;
        }
        let (ux, uy) = (dx / len, dy / len);
        let head = (0.3 * len).min(6.0);
        let (bx, by) = (x2 - head * ux, y2 - head * uy);
        let (nx, ny) = (-uy * head * 0.5, ux * head * 0.5);
        let _ = writeln!(
            self.body,
            r#"<g class="{class}"><line x1="{x1:.2}" y1="{y1:.2}" x2="{bx:.2}" y2="{by:.2}"/><polygon points="{x2:.2},{y2:.2} {:.2},{:.2} {:.2},{:.2}"/></g>"#,
            bx + nx,
            by + ny,
            bx - nx,
            by - ny
        );
    }

    /// Frame with `ticks` labelled ticks per axis.
    pub fn axes(&mut self, ticks: usize) {
        let r = self.spec.extents;
        let (w, h) = (self.spec.width, self.spec.height);
        let _ = writeln!(
            self.body,
            r#"<rect class="axis" x="{MARGIN}" y="{MARGIN}" width="{w:.2}" height="{h:.2}"/>"#
        );
        let n = ticks.max(2);
        for k in 0..n {
            let s = k as f64 / (n - 1) as f64;
            let x = r.x_min + s * (r.x_max - r.x_min);
            let y = r.y_min + s * (r.y_max - r.y_min);
            let (px, _) = self.px(Point2::new(x, r.y_min));
            let (_, py) = self.px(Point2::new(r.x_min, y));
            let bottom = MARGIN + h;
            let _ = writeln!(
                self.body,
                r#"<line class="axis" x1="{px:.2}" y1="{bottom:.2}" x2="{px:.2}" y2="{:.2}"/><text class="label" x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                bottom + 4.0,
                bottom + 16.0,
                tick_label(x)
            );
            let _ = writeln!(
                self.body,
                r#"<line class="axis" x1="{MARGIN}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}"/><text class="label" x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                MARGIN - 4.0,
                MARGIN - 6.0,
                py + 3.0,
                tick_label(y)
            );
        }
    }

    pub fn finish(self) -> String {
        let total_w = self.spec.width + 2.0 * MARGIN;
        let total_h = self.spec.height + 2.0 * MARGIN;
        format!(
            concat!(
                "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n",
                "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" ",
                "width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n",
                "<title>{title}</title>\n<style>{style}</style>\n",
                "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
                "{body}</svg>\n"
            ),
            w = total_w,
            h = total_h,
            title = xml_escape(&self.spec.title),
            style = STYLE,
            body = self.body
        )
    }
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

/// Segments of the `level` contour of `values`, sampled row-major on the
/// lattice `xs × ys`, by marching squares.
pub fn contour_segments(xs: &[f64], ys: &[f64], values: &[f64], level: f64) -> Vec<(Point2, Point2)> {
    let nx = xs.len();
    let at = |i: usize, j: usize| values[j * nx + i] - level;
    let lerp = |a: Point2, b: Point2, fa: f64, fb: f64| {
        let s = fa / (fa - fb);
        Point2::new(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y))
    };
    let mut out = Vec::new();
    for j in 0..ys.len().saturating_sub(1) {
        for i in 0..nx.saturating_sub(1) {
            let c = [
                (Point2::new(xs[i], ys[j]), at(i, j)),
                (Point2::new(xs[i + 1], ys[j]), at(i + 1, j)),
                (Point2::new(xs[i + 1], ys[j + 1]), at(i + 1, j + 1)),
                (Point2::new(xs[i], ys[j + 1]), at(i, j + 1)),
            ];
            if c.iter().any(|(_, f)| !f.is_finite()) {
                continue;
            }
            let mut cuts = Vec::with_capacity(4);
            for e in 0..4 {
                let (a, fa) = c[e];
                let (b, fb) = c[(e + 1) % 4];
                if (fa >= 0.0) != (fb >= 0.0) {
                    cuts.push(lerp(a, b, fa, fb));
                }
            }
            // saddles yield four cuts, paired along the cell edges
            for pair in cuts.chunks_exact(2) {
                out.push((pair[0], pair[1]));
            }
        }
    }
    out
}
