//! Problem configuration files.
//!
//! A configuration is a TOML document:
//!
//! ```toml
//! [constants]
//! a = 0.8
//! b = 1.0
//!
//! [wind]
//! x = "a*(b - y^2)^2"
//! y = "0"
//!
//! [speed]
//! expr = "cos(y)"
//!
//! [domain]
//! x = [-20.0, 20.0]
//! y = [-1.25, 1.25]
//! ```
//!
//! plus an optional `[metric]` table (`h11`, `h12`, `h22`, Euclidean by
//! default) and optional per-command tables `[field]`, `[geodesics]`,
//! `[indicatrix]` and `[compare]`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;
use toml::Spanned;

use crate::geometry::{MetricField, NavigationData, Point2, Rect, ScalarField, VectorField};

#[derive(Error, Debug)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: in `{key}`: {message}")]
    Expression {
        key: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    constants: BTreeMap<String, f64>,
    metric: Option<RawMetric>,
    wind: RawWind,
    speed: RawSpeed,
    domain: RawDomain,
    field: Option<FieldParams>,
    geodesics: Option<GeodesicsParams>,
    indicatrix: Option<IndicatrixParams>,
    compare: Option<CompareParams>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetric {
    h11: Spanned<String>,
    h12: Spanned<String>,
    h22: Spanned<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWind {
    x: Spanned<String>,
    y: Spanned<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpeed {
    expr: Spanned<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    x: [f64; 2],
    y: [f64; 2],
}

/// Parameters of the `field` command.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldParams {
    /// Samples per axis.
    pub grid: usize,
}

impl Default for FieldParams {
    fn default() -> Self {
        Self { grid: 41 }
    }
}

/// Parameters of the `geodesics` command.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeodesicsParams {
    pub p0: [f64; 2],
    /// Number of equally spaced initial headings.
    pub headings: usize,
    pub t_end: f64,
}

impl Default for GeodesicsParams {
    fn default() -> Self {
        Self {
            p0: [0.0, 0.0],
            headings: 36,
            t_end: 5.0,
        }
    }
}

/// Parameters of the `indicatrix` command.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IndicatrixParams {
    pub base: [f64; 2],
    pub horizons: Vec<f64>,
    /// Samples on each unit indicatrix.
    pub samples: usize,
    /// Geodesics per reachable set.
    pub headings: usize,
}

impl Default for IndicatrixParams {
    fn default() -> Self {
        Self {
            base: [0.0, 0.0],
            horizons: vec![1.0, 2.0],
            samples: 360,
            headings: 72,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointPair {
    pub from: [f64; 2],
    pub to: [f64; 2],
}

/// Parameters of the `compare` command.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareParams {
    /// Required closeness of each shot to its target.
    pub tolerance: f64,
    /// Integration horizon of every trial geodesic.
    pub horizon: f64,
    pub pairs: Vec<PointPair>,
}

impl Default for CompareParams {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            horizon: 8.0,
            pairs: Vec::new(),
        }
    }
}

/// A loaded problem: navigation data plus command parameters.
#[derive(Clone, Debug)]
pub struct Config {
    pub constants: BTreeMap<String, f64>,
    pub data: NavigationData,
    pub field: FieldParams,
    pub geodesics: GeodesicsParams,
    pub indicatrix: IndicatrixParams,
    pub compare: CompareParams,
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let src = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&src)
    }

    pub fn parse(src: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(src).map_err(|e| {
            let (line, column) = e.span().map_or((1, 1), |s| line_col(src, s.start));
            ConfigError::Syntax {
                line,
                column,
                message: e.message().to_string(),
            }
        })?;

        let field = |key: &str, s: &Spanned<String>| {
            ScalarField::parse_with(s.get_ref(), &raw.constants).map_err(|e| {
                // the span starts at the opening quote
                let (line, column) = line_col(src, s.span().start + 1);
                ConfigError::Expression {
                    key: key.to_string(),
                    line,
                    column: column + e.column - 1,
                    message: e.message,
                }
            })
        };
        let metric = match &raw.metric {
            Some(m) => MetricField {
                h11: field("metric.h11", &m.h11)?,
                h12: field("metric.h12", &m.h12)?,
                h22: field("metric.h22", &m.h22)?,
            },
            None => MetricField::euclidean(),
        };
        let wind = VectorField {
            x: field("wind.x", &raw.wind.x)?,
            y: field("wind.y", &raw.wind.y)?,
        };
        let speed = field("speed.expr", &raw.speed.expr)?;
        let [x0, x1] = raw.domain.x;
        let [y0, y1] = raw.domain.y;
        let domain = Rect::new(x0, x1, y0, y1);
        if domain.is_degenerate() || ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
            return Err(ConfigError::Invalid(format!(
                "degenerate domain [{x0}, {x1}] x [{y0}, {y1}]"
            )));
        }
        let cfg = Config {
            constants: raw.constants,
            data: NavigationData::new(metric, wind, speed, domain),
            field: raw.field.unwrap_or_default(),
            geodesics: raw.geodesics.unwrap_or_default(),
            indicatrix: raw.indicatrix.unwrap_or_default(),
            compare: raw.compare.unwrap_or_default(),
        };
        cfg.check_ranges()?;
        Ok(cfg)
    }

    fn check_ranges(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.field.grid < 2 {
            return bad(format!("field.grid must be at least 2, got {}", self.field.grid));
        }
        if self.geodesics.headings == 0 {
            return bad("geodesics.headings must be positive".into());
        }
        if !(self.geodesics.t_end > 0.0) {
            return bad(format!("geodesics.t_end must be positive, got {}", self.geodesics.t_end));
        }
        if self.indicatrix.samples < 8 {
            return bad(format!(
                "indicatrix.samples must be at least 8, got {}",
                self.indicatrix.samples
            ));
        }
        if self.indicatrix.headings < 3 {
            return bad(format!(
                "indicatrix.headings must be at least 3, got {}",
                self.indicatrix.headings
            ));
        }
        if let Some(h) = self.indicatrix.horizons.iter().find(|h| !(**h > 0.0)) {
            return bad(format!("indicatrix.horizons must be positive, got {h}"));
        }
        if !(self.compare.tolerance > 0.0) || !(self.compare.horizon > 0.0) {
            return bad("compare.tolerance and compare.horizon must be positive".into());
        }
        Ok(())
    }

    pub fn point(v: [f64; 2]) -> Point2 {
        Point2::new(v[0], v[1])
    }

    /// Serialises back to TOML; parsing the result yields an equal config.
    pub fn to_toml(&self) -> String {
        let q = |s: &ScalarField| toml::Value::String(s.source().to_string()).to_string();
        let fl = |v: f64| toml::Value::Float(v).to_string();
        let pt = |v: [f64; 2]| format!("[{}, {}]", fl(v[0]), fl(v[1]));
        let mut out = String::new();
        let d = &self.data;
        if !self.constants.is_empty() {
            out.push_str("[constants]\n");
            for (k, v) in &self.constants {
                let _ = writeln!(out, "{k} = {}", fl(*v));
            }
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "[metric]\nh11 = {}\nh12 = {}\nh22 = {}\n",
            q(&d.metric.h11),
            q(&d.metric.h12),
            q(&d.metric.h22)
        );
        let _ = writeln!(out, "[wind]\nx = {}\ny = {}\n", q(&d.wind.x), q(&d.wind.y));
        let _ = writeln!(out, "[speed]\nexpr = {}\n", q(&d.speed));
        let r = d.domain;
        let _ = writeln!(
            out,
            "[domain]\nx = {}\ny = {}\n",
            pt([r.x_min, r.x_max]),
            pt([r.y_min, r.y_max])
        );
        let _ = writeln!(out, "[field]\ngrid = {}\n", self.field.grid);
        let g = &self.geodesics;
        let _ = writeln!(
            out,
            "[geodesics]\np0 = {}\nheadings = {}\nt_end = {}\n",
            pt(g.p0),
            g.headings,
            fl(g.t_end)
        );
        let i = &self.indicatrix;
        let hs: Vec<String> = i.horizons.iter().map(|h| fl(*h)).collect();
        let _ = writeln!(
            out,
            "[indicatrix]\nbase = {}\nhorizons = [{}]\nsamples = {}\nheadings = {}\n",
            pt(i.base),
            hs.join(", "),
            i.samples,
            i.headings
        );
        let c = &self.compare;
        let _ = writeln!(
            out,
            "[compare]\ntolerance = {}\nhorizon = {}",
            fl(c.tolerance),
            fl(c.horizon)
        );
        for p in &c.pairs {
            let _ = write!(
                out,
                "\n[[compare.pairs]]\nfrom = {}\nto = {}\n",
                pt(p.from),
                pt(p.to)
            );
        }
        out
    }
}
