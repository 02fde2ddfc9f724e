//! The trace CSV wire format.
//!
//! Header `t,oracle_calls,eta,alpha,backtracks,accepted,merit,op_norm,est_err,phi`,
//! one row per iteration, floats with 17 significant digits and `accepted`
//! as `0`/`1`. Parsing a rendered trace gives back the same values bit for
//! bit (NaN included).

use std::fmt::Write as _;

use thiserror::Error;
use vrsda_core::solvers::TraceRecord;
use vrsda_core::vi::Point;

use crate::fmt_float;

pub const TRACE_HEADER: &str = "t,oracle_calls,eta,alpha,backtracks,accepted,merit,op_norm,est_err,phi";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CsvError {
    #[error("missing or wrong header, expected `{0}`")]
    Header(String),
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
}

pub fn render_trace(records: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(64 + records.len() * 200);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.t,
            r.oracle_calls,
            fmt_float(r.eta),
            fmt_float(r.alpha),
            r.backtracks,
            u8::from(r.accepted),
            fmt_float(r.merit),
            fmt_float(r.op_norm),
            fmt_float(r.est_err),
            fmt_float(r.phi),
        );
    }
    out
}

/// Parses a rendered trace. The per-iteration `calls` column is not part of
/// the wire format and is rebuilt from consecutive `oracle_calls` (the first
/// row gets its own `oracle_calls`).
pub fn parse_trace(text: &str) -> Result<Vec<TraceRecord>, CsvError> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(TRACE_HEADER) {
        return Err(CsvError::Header(TRACE_HEADER.to_string()));
    }
    let mut records: Vec<TraceRecord> = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(CsvError::Row {
                row,
                message: format!("expected 10 fields, found {}", fields.len()),
            });
        }
        let bad = |name: &str, v: &str| CsvError::Row {
            row,
            message: format!("bad `{name}` value `{v}`"),
        };
        let int = |k: usize, name: &str| fields[k].parse::<u64>().map_err(|_| bad(name, fields[k]));
        let float = |k: usize, name: &str| fields[k].parse::<f64>().map_err(|_| bad(name, fields[k]));
        let oracle_calls = int(1, "oracle_calls")?;
        let prev = records.last().map_or(0, |r| r.oracle_calls);
        records.push(TraceRecord {
            t: int(0, "t")?,
            oracle_calls,
            eta: float(2, "eta")?,
            alpha: float(3, "alpha")?,
            backtracks: fields[4].parse::<u32>().map_err(|_| bad("backtracks", fields[4]))?,
            accepted: match fields[5] {
                "1" => true,
                "0" => false,
                v => return Err(bad("accepted", v)),
            },
            merit: float(6, "merit")?,
            op_norm: float(7, "op_norm")?,
            est_err: float(8, "est_err")?,
            phi: float(9, "phi")?,
            calls: oracle_calls.saturating_sub(prev),
        });
    }
    Ok(records)
}

/// Iterate path `t,z1,...,zd`.
pub fn render_path(path: &[Point]) -> String {
    let d = path.first().map_or(0, Point::dim);
    let mut out = String::from("t");
    for j in 1..=d {
        let _ = write!(out, ",z{j}");
    }
    out.push('\n');
    for (t, z) in path.iter().enumerate() {
        let _ = write!(out, "{t}");
        for x in z.iter() {
            let _ = write!(out, ",{}", fmt_float(*x));
        }
        out.push('\n');
    }
    out
}

/// Parses a path file into its rows of coordinates.
pub fn parse_path(text: &str) -> Result<Vec<Vec<f64>>, CsvError> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    let cols: Vec<&str> = header.split(',').collect();
    let expected: Vec<String> = std::iter::once("t".to_string())
        .chain((1..cols.len()).map(|j| format!("z{j}")))
        .collect();
    if cols.len() < 2 || cols != expected {
        return Err(CsvError::Header("t,z1,...,zd".to_string()));
    }
    let d = cols.len() - 1;
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d + 1 {
            return Err(CsvError::Row {
                row: i + 1,
                message: format!("expected {} fields, found {}", d + 1, fields.len()),
            });
        }
        let coords = fields[1..]
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CsvError::Row {
                row: i + 1,
                message: e.to_string(),
            })?;
        rows.push(coords);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(t: u64, calls: u64, eta: f64, phi: f64) -> TraceRecord {
        TraceRecord {
            t,
            oracle_calls: calls,
            eta,
            alpha: 0.1,
            backtracks: 3,
            accepted: t.is_multiple_of(2),
            merit: 1.0 / 3.0,
            op_norm: std::f64::consts::PI,
            est_err: 1e-300,
            phi,
            calls: if t == 0 { calls } else { 3 },
        }
    }

    #[test]
    fn header_and_format() {
        let text = render_trace(&[record(0, 3, 0.5, 2.0)]);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(TRACE_HEADER));
        assert_eq!(
            lines.next(),
            Some("0,3,5.0000000000000000e-1,1.0000000000000001e-1,3,1,3.3333333333333331e-1,3.1415926535897931e0,1.0000000000000000e-300,2.0000000000000000e0")
        );
    }

    #[test]
    fn nan_and_bad_rows() {
        let recs = vec![record(0, 3, 0.0, f64::NAN)];
        let back = parse_trace(&render_trace(&recs)).unwrap();
        assert!(back[0].phi.is_nan());
        assert!(matches!(parse_trace("t,x\n"), Err(CsvError::Header(_))));
        let bad = format!("{TRACE_HEADER}\n0,1,2\n");
        assert!(matches!(parse_trace(&bad), Err(CsvError::Row { row: 1, .. })));
    }

    #[test]
    fn path_round_trip() {
        let path = vec![
            Point::new(vec![1.0, 0.1]).unwrap(),
            Point::new(vec![-0.5, 1e-17]).unwrap(),
        ];
        let text = render_path(&path);
        assert!(text.starts_with("t,z1,z2\n"));
        let rows = parse_path(&text).unwrap();
        assert_eq!(rows, vec![vec![1.0, 0.1], vec![-0.5, 1e-17]]);
    }
}
