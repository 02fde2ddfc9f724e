//! Regression dataset files: header `x1,...,xD,y`, one sample per row.

use std::fmt::Write as _;

use thiserror::Error;
use vrsda_core::{Matrix, Vector};

use crate::fmt_float;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("bad header: expected `x1,...,xD,y`")]
    Header,
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("dataset has no rows")]
    Empty,
}

pub fn render_dataset(x: &Matrix, y: &Vector) -> String {
    let (n, d) = x.shape();
    let mut out = String::new();
    for j in 1..=d {
        let _ = write!(out, "x{j},");
    }
    out.push_str("y\n");
    for i in 0..n {
        for j in 0..d {
            let _ = write!(out, "{},", fmt_float(x[(i, j)]));
        }
        let _ = writeln!(out, "{}", fmt_float(y[i]));
    }
    out
}

pub fn parse_dataset(text: &str) -> Result<(Matrix, Vector), DatasetError> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or(DatasetError::Header)?.trim().split(',').collect();
    let d = header.len().checked_sub(1).ok_or(DatasetError::Header)?;
    let ok = d > 0
        && header.last() == Some(&"y")
        && header[..d].iter().enumerate().all(|(j, h)| *h == format!("x{}", j + 1));
    if !ok {
        return Err(DatasetError::Header);
    }
    let mut values = Vec::new();
    let mut y = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| DatasetError::Row {
                row: i + 1,
                message: e.to_string(),
            })?;
        if row.len() != d + 1 {
            return Err(DatasetError::Row {
                row: i + 1,
                message: format!("expected {} fields, found {}", d + 1, row.len()),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(DatasetError::Row {
                row: i + 1,
                message: "non-finite value".to_string(),
            });
        }
        values.extend_from_slice(&row[..d]);
        y.push(row[d]);
    }
    if y.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok((Matrix::from_row_slice(y.len(), d, &values), Vector::from_vec(y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use vrsda_core::problems::generate_regression_data;

    #[test]
    fn round_trip_is_exact() {
        let data = generate_regression_data(30, 4, 0.1, 10.0, 3).unwrap();
        let text = render_dataset(&data.x, &data.y);
        assert!(text.starts_with("x1,x2,x3,x4,y\n"));
        let (x, y) = parse_dataset(&text).unwrap();
        assert_eq!(x, data.x);
        assert_eq!(y, data.y);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(matches!(parse_dataset("a,b\n1,2\n"), Err(DatasetError::Header)));
        assert!(matches!(
            parse_dataset("x1,y\n1\n"),
            Err(DatasetError::Row { row: 1, .. })
        ));
        assert!(matches!(parse_dataset("x1,y\n"), Err(DatasetError::Empty)));
    }
}
