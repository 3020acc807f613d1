//! Command-line front end.
//!
//! Exit status: 0 on success, 1 when a check fails (convexity violations,
//! violated transit-time inequality) or output cannot be written, 2 when the
//! arguments or configuration cannot be parsed.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{
    compare_pairs, indicatrix_intersections, reachable_set, sample_indicatrix, LemmaFlag,
    ShootingOptions,
};
use crate::config::Config;
use crate::export::{self, FanEntry};
use crate::geometry::{LineSlice, NavigationData, Point2, Rect};
use crate::ode::{StepControl, Tolerance};
use crate::randers::RandersMetric;
use crate::spray::{heading_grid, integrate_fan, SprayField};
use crate::svg::{contour_segments, PlotSpec, Svg, CLASSICAL, GENERALIZED, WIND};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "zermelo", version, about = "Time-optimal navigation with variable ship speed")]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct Common {
    /// Problem configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory for CSV and SVG files.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    /// Relative integration tolerance; the absolute one is 1e-3 of it.
    #[arg(long, global = true, value_name = "REL")]
    pub tol: Option<f64>,
    /// Samples per axis for field sampling and convexity checks.
    #[arg(long, global = true, value_name = "N")]
    pub grid: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Verb {
    /// Check the mild-wind and speed-cap conditions over the domain.
    Validate,
    /// Sample the current and ship speed on a grid.
    Field,
    /// Integrate fans of geodesics under both speed models.
    Geodesics {
        #[arg(long, value_parser = parse_point, value_name = "X,Y")]
        p0: Option<Point2>,
        /// Number of equally spaced headings.
        #[arg(long)]
        headings: Option<usize>,
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Compare unit indicatrices and reachable sets.
    Indicatrix {
        #[arg(long, value_parser = parse_point, value_name = "X,Y")]
        base: Option<Point2>,
        /// Comma-separated time horizons.
        #[arg(long, value_delimiter = ',')]
        horizons: Option<Vec<f64>>,
        /// Geodesics per reachable set.
        #[arg(long)]
        headings: Option<usize>,
    },
    /// Compare transit times of paired shots with and without variable speed.
    Compare {
        /// Required closeness of each shot to its target.
        #[arg(long)]
        shoot_tol: Option<f64>,
    },
}

fn parse_point(s: &str) -> Result<Point2, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected X,Y, got `{s}`"));
    }
    let v = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok(Point2::new(v(parts[0])?, v(parts[1])?))
}

/// Parses `args` and runs the command, returning the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
        }
    };
    let Some(path) = cli.common.config.as_deref() else {
        eprintln!("error: --config is required");
        return EXIT_PARSE;
    };
    let cfg = match Config::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return EXIT_PARSE;
        }
    };
    let step = match cli.common.tol {
        None => StepControl::default(),
        Some(r) if r > 0.0 && r < 1.0 => StepControl::with_tolerance(Tolerance {
            rtol: r,
            atol: r * 1e-3,
        }),
        Some(r) => {
            eprintln!("error: --tol must lie in (0, 1), got {r}");
            return EXIT_PARSE;
        }
    };
    if let Some(g) = cli.common.grid {
        if g < 2 {
            eprintln!("error: --grid must be at least 2, got {g}");
            return EXIT_PARSE;
        }
    }
    let ctx = Context {
        cfg,
        step,
        out: cli.common.out.clone(),
        grid: cli.common.grid,
    };
    let result = match cli.verb {
        Verb::Validate => ctx.validate(),
        Verb::Field => ctx.field(),
        Verb::Geodesics { p0, headings, t_end } => ctx.geodesics(p0, headings, t_end),
        Verb::Indicatrix {
            base,
            horizons,
            headings,
        } => ctx.indicatrix(base, horizons, headings),
        Verb::Compare { shoot_tol } => ctx.compare(shoot_tol),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                EXIT_PARSE
            } else {
                EXIT_CHECK_FAILED
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CmdError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Model(#[from] crate::error::Error),
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("writing {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

impl CmdError {
    fn is_usage(&self) -> bool {
        matches!(self, CmdError::Usage(_))
    }
}

type CmdResult = Result<i32, CmdError>;

struct Context {
    cfg: Config,
    step: StepControl,
    out: PathBuf,
    grid: Option<usize>,
}

impl Context {
    fn data(&self) -> &NavigationData {
        &self.cfg.data
    }

    fn grid(&self) -> usize {
        self.grid.unwrap_or(self.cfg.field.grid)
    }

    fn create(&self, name: &str) -> Result<(BufWriter<File>, PathBuf), CmdError> {
        std::fs::create_dir_all(&self.out).map_err(|source| CmdError::Io {
            path: self.out.clone(),
            source,
        })?;
        let path = self.out.join(name);
        let f = File::create(&path).map_err(|source| CmdError::Io {
            path: path.clone(),
            source,
        })?;
        Ok((BufWriter::new(f), path))
    }

    fn write_csv(
        &self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<File>) -> export::CsvResult,
    ) -> Result<(), CmdError> {
        let (mut w, path) = self.create(name)?;
        f(&mut w).map_err(|source| CmdError::Csv { path, source })?;
        println!("wrote {}", self.out.join(name).display());
        Ok(())
    }

    fn write_svg(&self, name: &str, svg: Svg) -> Result<(), CmdError> {
        let path = self.out.join(name);
        write_text(&path, &svg.finish())?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn validate(&self) -> CmdResult {
        let report = self.data().validate_convexity(self.grid())?;
        println!(
            "samples: {}, violations: {}",
            report.samples,
            report.violations.len()
        );
        for v in &report.violations {
            let kinds: Vec<String> = v.kinds.iter().map(|k| format!("{k:?}")).collect();
            println!(
                "  ({}, {}) wind_norm={} speed={} {}",
                v.point.x,
                v.point.y,
                v.wind_norm,
                v.speed,
                kinds.join(",")
            );
        }
        Ok(if report.passed() {
            println!("ok");
            EXIT_OK
        } else {
            EXIT_CHECK_FAILED
        })
    }

    fn field(&self) -> CmdResult {
        let data = self.data();
        let grid = self.grid();
        self.write_csv("field.csv", |w| export::write_field(w, data, grid))?;

        let r = data.domain;
        let mut svg = Svg::new(PlotSpec::new(r, "current and ship speed")?);
        svg.axes(5);
        let n = 101;
        let lin = |lo: f64, hi: f64| -> Vec<f64> {
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        };
        let (xs, ys) = (lin(r.x_min, r.x_max), lin(r.y_min, r.y_max));
        let mut speed = Vec::with_capacity(n * n);
        let mut margin = Vec::with_capacity(n * n);
        for &y in &ys {
            for &x in &xs {
                let p = Point2::new(x, y);
                speed.push(data.speed.value(p));
                margin.push(data.convexity_margin(p));
            }
        }
        for level in [0.2, 0.4, 0.6, 0.8, 1.0] {
            for (a, b) in contour_segments(&xs, &ys, &speed, level) {
                svg.segment(a, b, "contour");
            }
        }
        for (a, b) in contour_segments(&xs, &ys, &margin, 0.0) {
            svg.segment(a, b, "boundary");
        }
        wind_glyphs(&mut svg, data, r, 21, 11);
        self.write_svg("field.svg", svg)?;

        // report the convexity boundary along the vertical through the domain centre
        let xc = 0.5 * (r.x_min + r.x_max);
        let roots = data.convexity_boundary(&LineSlice::Vertical {
            x: xc,
            lo: r.y_min,
            hi: r.y_max,
        });
        if roots.is_empty() {
            println!("no convexity boundary on x = {xc}");
        }
        for y in roots {
            println!("convexity boundary on x = {xc}: y = {y}");
        }
        Ok(EXIT_OK)
    }

    fn geodesics(&self, p0: Option<Point2>, headings: Option<usize>, t_end: Option<f64>) -> CmdResult {
        let g = &self.cfg.geodesics;
        let p0 = p0.unwrap_or(Config::point(g.p0));
        let n = headings.unwrap_or(g.headings);
        let t_end = t_end.unwrap_or(g.t_end);
        if n == 0 || !(t_end > 0.0) {
            return Err(CmdError::Usage(format!(
                "need a positive heading count and end time, got {n} and {t_end}"
            )));
        }
        let phis = heading_grid(n);
        let series = [
            (CLASSICAL, self.data().classical()),
            (GENERALIZED, self.data().clone()),
        ];
        let fans: Vec<_> = series
            .iter()
            .map(|(tag, d)| {
                let spray = SprayField::from_data(d.clone());
                (*tag, integrate_fan(&spray, p0, &phis, t_end, &self.step))
            })
            .collect();
        let messages: Vec<Vec<String>> = fans
            .iter()
            .map(|(_, f)| {
                f.iter()
                    .map(|r| r.as_ref().err().map(|e| e.to_string()).unwrap_or_default())
                    .collect()
            })
            .collect();
        let table: Vec<(&str, Vec<(f64, FanEntry<'_>)>)> = fans
            .iter()
            .zip(&messages)
            .map(|((tag, fan), msgs)| {
                let entries = fan
                    .iter()
                    .zip(msgs)
                    .zip(&phis)
                    .map(|((r, m), phi)| match r {
                        Ok(tr) => (*phi, FanEntry::Ok(tr)),
                        Err(_) => (*phi, FanEntry::Failed(m.as_str())),
                    })
                    .collect();
                (*tag, entries)
            })
            .collect();
        self.write_csv("geodesics.csv", |w| export::write_fans(w, &table))?;

        let all_points = fans
            .iter()
            .flat_map(|(_, f)| f.iter().flatten())
            .flat_map(|tr| tr.samples.iter().map(|s| s.p));
        let spec = PlotSpec::fit(all_points.chain([p0]), 0.05, "geodesic fans")?;
        let view = spec.extents;
        let mut svg = Svg::new(spec);
        svg.axes(5);
        wind_glyphs(&mut svg, self.data(), view, 15, 9);
        for (tag, fan) in &fans {
            for tr in fan.iter().flatten() {
                let pts: Vec<Point2> = tr.samples.iter().map(|s| s.p).collect();
                svg.polyline(&pts, tag, false);
            }
        }
        svg.circle(p0, 3.0, GENERALIZED);
        self.write_svg("geodesics.svg", svg)?;

        for (tag, fan) in &fans {
            let ok = fan.iter().flatten().count();
            let full = fan
                .iter()
                .flatten()
                .filter(|t| t.termination == crate::spray::Termination::TimeReached)
                .count();
            println!("{tag}: {} headings, {ok} integrated, {full} reached t = {t_end}", fan.len());
        }
        Ok(EXIT_OK)
    }

    fn indicatrix(
        &self,
        base: Option<Point2>,
        horizons: Option<Vec<f64>>,
        headings: Option<usize>,
    ) -> CmdResult {
        let ip = &self.cfg.indicatrix;
        let base = base.unwrap_or(Config::point(ip.base));
        let horizons = horizons.unwrap_or_else(|| ip.horizons.clone());
        let n = headings.unwrap_or(ip.headings);
        if n < 3 || horizons.iter().any(|h| !(*h > 0.0)) {
            return Err(CmdError::Usage(
                "need at least 3 headings and positive horizons".into(),
            ));
        }
        let classical = self.data().classical();
        let generalized = self.data().clone();
        let ic = sample_indicatrix(&RandersMetric::new(classical.clone()), base, ip.samples)?;
        let ig = sample_indicatrix(&RandersMetric::new(generalized.clone()), base, ip.samples)?;
        let report = indicatrix_intersections(&ic, &ig)?;

        let phis = heading_grid(n);
        let sc = SprayField::from_data(classical);
        let sg = SprayField::from_data(generalized);
        let mut sets = Vec::new();
        for &h in &horizons {
            sets.push((CLASSICAL, reachable_set(&sc, base, h, &phis, &self.step)?));
            sets.push((GENERALIZED, reachable_set(&sg, base, h, &phis, &self.step)?));
        }
        let set_refs: Vec<(&str, &_)> = sets.iter().map(|(t, s)| (*t, s)).collect();
        self.write_csv("indicatrix.csv", |w| {
            export::write_indicatrices(w, &[(CLASSICAL, &ic), (GENERALIZED, &ig)], &set_refs)
        })?;

        let unit = |ind: &crate::analysis::Indicatrix| -> Vec<Point2> {
            ind.samples
                .iter()
                .map(|t| Point2::new(base.x + t.u, base.y + t.v))
                .collect()
        };
        let (uc, ug) = (unit(&ic), unit(&ig));
        let pts = sets
            .iter()
            .flat_map(|(_, s)| s.frontier())
            .chain(uc.iter().copied())
            .chain(ug.iter().copied());
        let spec = PlotSpec::fit(pts, 0.05, "indicatrices and reachable sets")?;
        let mut svg = Svg::new(spec);
        svg.axes(5);
        svg.polyline(&uc, &format!("{CLASSICAL} dotted"), true);
        svg.polyline(&ug, &format!("{GENERALIZED} dotted"), true);
        for (tag, s) in &sets {
            svg.polyline(&s.frontier(), tag, true);
        }
        let w = self.data().wind.at(base);
        svg.arrow(base, Point2::new(base.x + w.u, base.y + w.v), WIND);
        svg.circle(base, 3.0, GENERALIZED);
        self.write_svg("indicatrix.svg", svg)?;

        if report.coincident {
            println!("unit indicatrices at {base} coincide");
        } else {
            println!("unit indicatrix crossings at {base}: {:?}", report.crossings);
            println!("unit indicatrix touches at {base}: {:?}", report.touches);
            if let Some(c) = report.containment {
                println!("containment: {c:?}");
            }
        }
        for (tag, s) in &sets {
            println!(
                "{tag} t = {}: {} endpoints, {} early terminations",
                s.horizon,
                s.endpoints().len(),
                s.early_terminations().len()
            );
        }
        Ok(EXIT_OK)
    }

    fn compare(&self, shoot_tol: Option<f64>) -> CmdResult {
        let c = &self.cfg.compare;
        if c.pairs.is_empty() {
            return Err(CmdError::Usage("no [[compare.pairs]] in configuration".into()));
        }
        let tol = shoot_tol.unwrap_or(c.tolerance);
        if !(tol > 0.0) {
            return Err(CmdError::Usage(format!("shooting tolerance must be positive, got {tol}")));
        }
        let opts = ShootingOptions {
            horizon: c.horizon,
            step: self.step,
            ..ShootingOptions::default()
        };
        let pairs: Vec<(Point2, Point2)> = c
            .pairs
            .iter()
            .map(|p| (Config::point(p.from), Config::point(p.to)))
            .collect();
        let rows = compare_pairs(self.data(), &pairs, tol, &opts)
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
        self.write_csv("compare.csv", |w| export::write_comparisons(w, &rows))?;
        let mut violated = 0;
        for r in &rows {
            if r.flag == LemmaFlag::Violated {
                violated += 1;
            }
            println!("{} -> {}: {}", r.p0, r.target, r.flag.as_str());
        }
        Ok(if violated == 0 {
            EXIT_OK
        } else {
            EXIT_CHECK_FAILED
        })
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), CmdError> {
    std::fs::write(path, text).map_err(|source| CmdError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Arrows of the current on an `nx × ny` lattice over `view`, scaled so the
/// strongest fits one lattice cell.
fn wind_glyphs(svg: &mut Svg, data: &NavigationData, view: Rect, nx: usize, ny: usize) {
    let cell_x = (view.x_max - view.x_min) / nx as f64;
    let cell_y = (view.y_max - view.y_min) / ny as f64;
    let pts: Vec<Point2> = (0..ny)
        .flat_map(|j| {
            (0..nx).map(move |i| {
                Point2::new(
                    view.x_min + cell_x * (i as f64 + 0.5),
                    view.y_min + cell_y * (j as f64 + 0.5),
                )
            })
        })
        .filter(|p| data.domain.contains(*p))
        .collect();
    let winds: Vec<_> = pts.iter().map(|p| data.wind.at(*p)).collect();
    let max = pts
        .iter()
        .map(|p| data.wind_norm(*p))
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    if !(max > 0.0) {
        return;
    }
    for (p, w) in pts.iter().zip(&winds) {
        let sx = 0.9 * cell_x / max;
        let sy = 0.9 * cell_y / max;
        svg.arrow(*p, Point2::new(p.x + w.u * sx, p.y + w.v * sy), WIND);
    }
}
