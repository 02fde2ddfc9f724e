//! Deterministic SVG plots: operator-norm convergence on a log axis and
//! two-dimensional iterate trajectories.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;
use vrsda_core::solvers::{SolverKind, TraceRecord};

use crate::trace_csv::{parse_path, parse_trace, CsvError};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
/// Polylines are thinned to at most this many vertices.
const MAX_VERTICES: usize = 2000;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: CsvError,
    },
    #[error("{0}")]
    Contract(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Trajectory,
    Convergence,
}

impl FromStr for PlotKind {
    type Err = PlotError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "trajectory" => Ok(PlotKind::Trajectory),
            "convergence" => Ok(PlotKind::Convergence),
            _ => Err(PlotError::Contract(format!(
                "unknown plot kind `{s}` (trajectory|convergence)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub kind: Option<SolverKind>,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    /// `(oracle_calls, op_norm)` per iteration.
    pub fn convergence(label: &str, records: &[TraceRecord]) -> Self {
        Self {
            label: label.to_string(),
            kind: kind_of(label),
            points: records.iter().map(|r| (r.oracle_calls as f64, r.op_norm)).collect(),
        }
    }

    /// Iterate path of a two-dimensional problem.
    pub fn trajectory(label: &str, path: &[Vec<f64>]) -> Result<Self, PlotError> {
        if let Some(bad) = path.iter().find(|p| p.len() != 2) {
            return Err(PlotError::Contract(format!(
                "trajectory plots need d = 2, `{label}` has d = {}",
                bad.len()
            )));
        }
        Ok(Self {
            label: label.to_string(),
            kind: kind_of(label),
            points: path.iter().map(|p| (p[0], p[1])).collect(),
        })
    }
}

/// Solver kind named by a label: an exact name, or the longest name followed
/// by `_`.
pub fn kind_of(label: &str) -> Option<SolverKind> {
    SolverKind::ALL
        .iter()
        .copied()
        .filter(|k| label == k.name() || label.starts_with(&format!("{}_", k.name())))
        .max_by_key(|k| k.name().len())
}

pub fn color(kind: Option<SolverKind>) -> &'static str {
    match kind {
        Some(SolverKind::Sgda) => "#d62728",
        Some(SolverKind::Adam) => "#2ca02c",
        Some(SolverKind::VrSdaA) => "#1f77b4",
        Some(SolverKind::Seg) => "#ff7f0e",
        Some(SolverKind::SdaA) => "#9467bd",
        Some(SolverKind::VrSdaFixed) => "#7f7f7f",
        None => "#17becf",
    }
}

/// Fixed series order: by solver kind, then input order.
fn ordered(series: &[Series]) -> Vec<&Series> {
    let mut out: Vec<&Series> = series.iter().collect();
    out.sort_by_key(|s| {
        s.kind
            .and_then(|k| SolverKind::ALL.iter().position(|a| *a == k))
            .unwrap_or(SolverKind::ALL.len())
    });
    out
}

fn thin(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    if points.len() <= MAX_VERTICES {
        return points.to_vec();
    }
    let stride = points.len().div_ceil(MAX_VERTICES);
    let mut out: Vec<_> = points.iter().copied().step_by(stride).collect();
    if !(points.len() - 1).is_multiple_of(stride) {
        out.push(points[points.len() - 1]);
    }
    out
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let (x0, x1) = if x1 > x0 { (x0, x1) } else { (x0 - 0.5, x0 + 0.5) };
        let (y0, y1) = if y1 > y0 { (y0, y1) } else { (y0 - 0.5, y0 + 0.5) };
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{LEFT}" y="18" font-size="13">{title}</text>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - LEFT - RIGHT,
        HEIGHT - TOP - BOTTOM
    );
}

fn legend(out: &mut String, series: &[&Series]) {
    let x = WIDTH - RIGHT + 12.0;
    for (i, s) in series.iter().enumerate() {
        let y = TOP + 14.0 + 16.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            x + 18.0,
            color(s.kind),
            x + 24.0,
            y + 4.0,
            escape(&s.label)
        );
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn polyline(out: &mut String, frame: &Frame, pts: &[(f64, f64)], stroke: &str) {
    if pts.len() == 1 {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{stroke}"/>"#,
            frame.px(pts[0].0),
            frame.py(pts[0].1)
        );
        return;
    }
    let mut d = String::new();
    for (i, (x, y)) in pts.iter().enumerate() {
        if i > 0 {
            d.push(' ');
        }
        let _ = write!(d, "{:.2},{:.2}", frame.px(*x), frame.py(*y));
    }
    let _ = writeln!(
        out,
        r#"<polyline points="{d}" fill="none" stroke="{stroke}" stroke-width="1.2"/>"#
    );
}

/// `op_norm` against oracle calls with a log₁₀ y-axis. Non-positive norms
/// are dropped.
pub fn convergence_svg(series: &[Series]) -> String {
    let ordered = ordered(series);
    let logged: Vec<Vec<(f64, f64)>> = ordered
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite() && *y > 0.0)
                .map(|(x, y)| (*x, y.log10()))
                .collect()
        })
        .collect();
    let all = logged.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in all {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let frame = Frame::new(x0.min(0.0), x1, y0.floor(), y1.ceil());
    let mut out = String::new();
    open(&mut out, "operator norm vs oracle calls");
    let first = frame.y0 as i64;
    let last = frame.y1 as i64;
    let step = ((last - first) / 8).max(1);
    let mut k = first;
    while k <= last {
        let y = frame.py(k as f64);
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{}" y="{:.2}" text-anchor="end">1e{k}</text>"##,
            WIDTH - RIGHT,
            LEFT - 6.0,
            y + 4.0
        );
        k += step;
    }
    for i in 0..=4 {
        let v = frame.x0 + (frame.x1 - frame.x0) * f64::from(i) / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{v:.0}</text>"#,
            frame.px(v),
            HEIGHT - BOTTOM + 16.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{}" text-anchor="middle">oracle calls</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 12.0
    );
    for (s, pts) in ordered.iter().zip(&logged) {
        if !pts.is_empty() {
            polyline(&mut out, &frame, &thin(pts), color(s.kind));
        }
    }
    legend(&mut out, &ordered);
    out.push_str("</svg>\n");
    out
}

/// Iterate paths in the `(θ, φ)` plane on a square frame centred on the
/// origin, which is marked with a cross. Each path starts at a hollow
/// marker; a single-point path is drawn as one filled marker.
pub fn trajectory_svg(series: &[Series]) -> String {
    let ordered = ordered(series);
    let r = ordered
        .iter()
        .flat_map(|s| s.points.iter())
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(x, y)| x.abs().max(y.abs()))
        .fold(0.0f64, f64::max);
    let r = if r > 0.0 { r * 1.05 } else { 1.0 };
    let frame = Frame::new(-r, r, -r, r);
    let mut out = String::new();
    open(&mut out, "trajectories");
    for i in 0..=4 {
        let v = -r + 2.0 * r * f64::from(i) / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{v:.3}</text><text x="{}" y="{:.2}" text-anchor="end">{v:.3}</text>"#,
            frame.px(v),
            HEIGHT - BOTTOM + 16.0,
            LEFT - 6.0,
            frame.py(v) + 4.0
        );
    }
    let (ox, oy) = (frame.px(0.0), frame.py(0.0));
    let _ = writeln!(
        out,
        r#"<path d="M{:.2},{oy:.2}H{:.2}M{ox:.2},{:.2}V{:.2}" stroke="black" stroke-width="1.5"/>"#,
        ox - 6.0,
        ox + 6.0,
        oy - 6.0,
        oy + 6.0
    );
    for s in &ordered {
        let pts: Vec<(f64, f64)> = s
            .points
            .iter()
            .copied()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        if pts.is_empty() {
            continue;
        }
        let c = color(s.kind);
        polyline(&mut out, &frame, &thin(&pts), c);
        if pts.len() > 1 {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="white" stroke="{c}"/>"#,
                frame.px(pts[0].0),
                frame.py(pts[0].1)
            );
        }
    }
    legend(&mut out, &ordered);
    out.push_str("</svg>\n");
    out
}

/// Series label from a file name: `sgda_run0_b5000.csv` → `sgda`.
pub fn label_from_path(path: &Path) -> String {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("series");
    let stem = name
        .strip_suffix(".path.csv")
        .or_else(|| name.strip_suffix(".csv"))
        .unwrap_or(name);
    match stem.rfind("_run") {
        Some(i) if i > 0 => stem[..i].to_string(),
        _ => stem.to_string(),
    }
}

fn read(path: &Path) -> Result<String, PlotError> {
    fs::read_to_string(path).map_err(|source| PlotError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Path file belonging to a trace: the file itself if it is one, otherwise
/// the sibling `*.path.csv`.
fn path_file(trace: &Path) -> PathBuf {
    let name = trace.to_string_lossy();
    if name.ends_with(".path.csv") {
        trace.to_path_buf()
    } else {
        trace.with_extension("path.csv")
    }
}

/// Reads trace files and writes the requested plot to `out`.
pub fn emit_plot(kind: PlotKind, out: &Path, traces: &[PathBuf]) -> Result<(), PlotError> {
    if traces.is_empty() {
        return Err(PlotError::Contract("no trace files given".into()));
    }
    let mut series = Vec::new();
    for t in traces {
        let label = label_from_path(t);
        match kind {
            PlotKind::Convergence => {
                let recs = parse_trace(&read(t)?).map_err(|source| PlotError::Csv {
                    path: t.clone(),
                    source,
                })?;
                series.push(Series::convergence(&label, &recs));
            }
            PlotKind::Trajectory => {
                let p = path_file(t);
                let rows = parse_path(&read(&p)?).map_err(|source| PlotError::Csv {
                    path: p.clone(),
                    source,
                })?;
                series.push(Series::trajectory(&label, &rows)?);
            }
        }
    }
    let svg = match kind {
        PlotKind::Convergence => convergence_svg(&series),
        PlotKind::Trajectory => trajectory_svg(&series),
    };
    fs::write(out, svg).map_err(|source| PlotError::Io {
        path: out.to_path_buf(),
        source,
    })
}
