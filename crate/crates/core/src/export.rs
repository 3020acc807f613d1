//! CSV tables. Numbers use Rust's shortest round-trip formatting, so equal
//! inputs always produce byte-identical files.

use std::io::Write;

use crate::analysis::{Indicatrix, LemmaComparison, ReachableSet};
use crate::geometry::{NavigationData, Point2};
use crate::spray::Trajectory;

pub type CsvResult = std::result::Result<(), csv::Error>;

/// Shortest decimal string that parses back to `v`.
pub fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub const FIELD_HEADER: [&str; 7] = ["x", "y", "w1", "w2", "wind_norm", "speed", "margin"];

/// `grid × grid` samples of the current and ship speed over the domain.
pub fn write_field<W: Write>(out: W, data: &NavigationData, grid: usize) -> CsvResult {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FIELD_HEADER)?;
    for p in field_grid(data, grid) {
        let wind = data.wind.at(p);
        let wn = data.wind_norm(p);
        let s = data.speed.value(p);
        w.write_record([p.x, p.y, wind.u, wind.v, wn, s, s - wn].map(num))?;
    }
    w.flush()?;
    Ok(())
}

/// Row-major lattice over the domain, edges included.
pub fn field_grid(data: &NavigationData, grid: usize) -> Vec<Point2> {
    let r = data.domain;
    let at = |lo: f64, hi: f64, i: usize| {
        if i + 1 == grid {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (grid - 1) as f64
        }
    };
    (0..grid)
        .flat_map(|j| (0..grid).map(move |i| Point2::new(at(r.x_min, r.x_max, i), at(r.y_min, r.y_max, j))))
        .collect()
}

pub const TRAJECTORY_HEADER: [&str; 6] = ["time", "x", "y", "u", "v", "f_speed"];

/// One row per sample of a single trajectory.
pub fn write_trajectory<W: Write>(out: W, tr: &Trajectory) -> CsvResult {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for (s, f) in tr.samples.iter().zip(&tr.speeds) {
        w.write_record([s.time, s.p.x, s.p.y, s.t.u, s.t.v, *f].map(num))?;
    }
    w.flush()?;
    Ok(())
}

pub const FAN_HEADER: [&str; 11] = [
    "series",
    "index",
    "phi0",
    "termination",
    "sample",
    "time",
    "x",
    "y",
    "u",
    "v",
    "f_speed",
];

/// Outcome of one heading of a fan.
pub enum FanEntry<'a> {
    Ok(&'a Trajectory),
    /// The geodesic could not be started.
    Failed(&'a str),
}

/// All trajectories of one or more fans, tagged by series. A heading that
/// could not be integrated gets a single row with the reason and empty
/// numeric fields.
pub fn write_fans<W: Write>(out: W, fans: &[(&str, Vec<(f64, FanEntry<'_>)>)]) -> CsvResult {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FAN_HEADER)?;
    for (series, fan) in fans {
        for (index, (phi, entry)) in fan.iter().enumerate() {
            match entry {
                FanEntry::Ok(tr) => {
                    for (k, (s, f)) in tr.samples.iter().zip(&tr.speeds).enumerate() {
                        let mut rec = vec![
                            series.to_string(),
                            index.to_string(),
                            num(*phi),
                            tr.termination.as_str().to_string(),
                            k.to_string(),
                        ];
                        rec.extend([s.time, s.p.x, s.p.y, s.t.u, s.t.v, *f].map(num));
                        w.write_record(&rec)?;
                    }
                }
                FanEntry::Failed(reason) => {
                    let mut rec = vec![
                        series.to_string(),
                        index.to_string(),
                        num(*phi),
                        format!("failed: {reason}"),
                    ];
                    rec.extend(std::iter::repeat_n(String::new(), 7));
                    w.write_record(&rec)?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub const INDICATRIX_HEADER: [&str; 8] = [
    "curve",
    "series",
    "horizon",
    "index",
    "heading",
    "x",
    "y",
    "termination",
];

/// Unit indicatrices (`curve = indicatrix`, `x`/`y` are the tangent vector
/// components, empty horizon) followed by reachable sets (`curve = reachable`,
/// `x`/`y` the last position of each geodesic).
pub fn write_indicatrices<W: Write>(
    out: W,
    indicatrices: &[(&str, &Indicatrix)],
    reachable: &[(&str, &ReachableSet)],
) -> CsvResult {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(INDICATRIX_HEADER)?;
    for (series, ind) in indicatrices {
        for (k, (phi, t)) in ind.headings.iter().zip(&ind.samples).enumerate() {
            w.write_record([
                "indicatrix".to_string(),
                series.to_string(),
                String::new(),
                k.to_string(),
                num(*phi),
                num(t.u),
                num(t.v),
                String::new(),
            ])?;
        }
    }
    for (series, rs) in reachable {
        for (k, ray) in rs.rays.iter().enumerate() {
            w.write_record([
                "reachable".to_string(),
                series.to_string(),
                num(rs.horizon),
                k.to_string(),
                num(ray.heading),
                num(ray.last.p.x),
                num(ray.last.p.y),
                ray.termination.as_str().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub const COMPARE_HEADER: [&str; 10] = [
    "p0_x",
    "p0_y",
    "target_x",
    "target_y",
    "t_classical",
    "t_generalized",
    "gap",
    "phi_classical",
    "phi_generalized",
    "flag",
];

pub fn write_comparisons<W: Write>(out: W, rows: &[LemmaComparison]) -> CsvResult {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARE_HEADER)?;
    for r in rows {
        w.write_record([
            num(r.p0.x),
            num(r.p0.y),
            num(r.target.x),
            num(r.target.y),
            opt(r.t_classical),
            opt(r.t_generalized),
            opt(r.gap()),
            opt(r.phi_classical),
            opt(r.phi_generalized),
            r.flag.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
