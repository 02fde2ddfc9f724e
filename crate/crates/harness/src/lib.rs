//! Experiment orchestration for `vrsda-core`: config files, CSV traces,
//! datasets, SVG plots and the diagnostic check table.

pub mod check;
pub mod config;
pub mod dataset;
pub mod plot;
pub mod runner;
pub mod trace_csv;

/// Renders a float with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}
