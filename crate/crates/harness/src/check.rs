//! The `check` command: closed-form diagnostics on analytic instances.

use std::fmt::Write as _;

use vrsda_core::diagnostics::{
    check_merit_smoothness, check_variance_recursion, estimate_dissipativity, estimate_lipschitz, fit_rate,
    replay_certificates, Region,
};
use vrsda_core::linesearch::LineSearchConfig;
use vrsda_core::problems::{make_bilinear, make_quadratic};
use vrsda_core::solvers::{run, SolverConfig, SolverKind};
use vrsda_core::vi::JacobianSource;
use vrsda_core::{Point, ViError};

pub const CERTIFICATE_CHECK: &str = "acceptance-certificate";
/// Curvature constant the certificate fixture is replayed against.
pub const NOMINAL_C: f64 = 2.0;
const SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Default)]
pub struct CheckOptions {
    /// Forces the line-search constant of the certificate fixture (self-test).
    pub override_c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: &'static str,
    pub pass: bool,
    pub observed: String,
    pub expected: String,
}

fn row(name: &'static str, pass: bool, observed: String, expected: String) -> CheckRow {
    CheckRow {
        name,
        pass,
        observed,
        expected,
    }
}

fn within(name: &'static str, got: Result<f64, ViError>, want: f64, tol: f64) -> CheckRow {
    match got {
        Ok(v) => row(
            name,
            (v - want).abs() <= tol,
            format!("{v:.12}"),
            format!("{want:.12} ± {tol:e}"),
        ),
        Err(e) => row(name, false, format!("error: {e}"), format!("{want:.12} ± {tol:e}")),
    }
}

pub fn run_checks(opts: &CheckOptions) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    let region = Region::origin(2);
    let analytic = JacobianSource::Analytic;
    let bilinear = make_bilinear(0.0).expect("bilinear game");
    let quad = make_quadratic(0.5, 0.0).expect("quadratic game");
    let quad2 = make_quadratic(2.0, 0.0).expect("quadratic game");

    rows.push(within(
        "lipschitz/bilinear",
        estimate_lipschitz(&bilinear, &region, 1000, SEED),
        1.0,
        1e-9,
    ));
    rows.push(within(
        "lipschitz/quadratic",
        estimate_lipschitz(&quad, &region, 1000, SEED),
        1.25f64.sqrt(),
        1e-9,
    ));
    rows.push(within(
        "dissipativity/bilinear",
        estimate_dissipativity(&bilinear, &region, 1000, SEED, analytic),
        0.0,
        1e-9,
    ));
    rows.push(within(
        "dissipativity/quadratic-0.5",
        estimate_dissipativity(&quad, &region, 1000, SEED, analytic),
        0.5,
        1e-9,
    ));
    rows.push(within(
        "dissipativity/quadratic-2",
        estimate_dissipativity(&quad2, &region, 1000, SEED, analytic),
        2.0,
        1e-9,
    ));

    rows.push(
        match check_merit_smoothness(&quad, 10.0, 1.25f64.sqrt(), 0.0, &region, 1000, SEED, analytic) {
            Ok(r) => row(
                "merit-smoothness",
                r.pass,
                format!("{:.12}", r.observed),
                format!("<= {:.12}", r.bound),
            ),
            Err(e) => row("merit-smoothness", false, format!("error: {e}"), "<= 1.25".into()),
        },
    );

    rows.push(
        match check_variance_recursion(&[0.25, 1.0, 2.25], &[0.01, 0.1, 0.5], &[0.0, 0.1], 10_000, SEED) {
            Ok(r) => row(
                "variance-recursion",
                r.pass,
                format!("{:.4} of {} cells inside", r.pass_fraction, r.cells.len()),
                ">= 0.99 inside bound + 3 SE".into(),
            ),
            Err(e) => row("variance-recursion", false, format!("error: {e}"), ">= 0.99".into()),
        },
    );

    let budgets = [1e3, 3e3, 1e4, 3e4, 1e5];
    for (name, slope) in [("rate-fit/t^-2/3", -2.0 / 3.0), ("rate-fit/t^-1/2", -0.5)] {
        let values: Vec<f64> = budgets.iter().map(|t: &f64| 3.0 * t.powf(slope)).collect();
        rows.push(within(name, fit_rate(&budgets, &values).map(|f| f.slope), slope, 1e-9));
    }

    rows.push(certificate_check(opts.override_c));
    rows
}

/// VR-SDA-A on the noisy quadratic game with `c = 2 ≥ ‖A‖`; every accepted
/// step must replay as accepted under the nominal constant.
fn certificate_check(override_c: Option<f64>) -> CheckRow {
    let expected = format!("> 0 accepted steps, 100% replayed at c = {NOMINAL_C}");
    let problem = match make_quadratic(0.5, 2.25) {
        Ok(p) => p,
        Err(e) => return row(CERTIFICATE_CHECK, false, format!("error: {e}"), expected),
    };
    let c = override_c.unwrap_or(NOMINAL_C);
    let cfg = SolverConfig::new(SolverKind::VrSdaA, 3000, SEED)
        .with_line_search(LineSearchConfig::new(c, 0.5, 0.5))
        .with_certificates();
    let z0 = Point::new(vec![1.0, 1.0]).expect("finite point");
    let result = run(&problem, &z0, &cfg)
        .map_err(|e| e.to_string())
        .and_then(|tr| replay_certificates(&problem, &tr, NOMINAL_C).map_err(|e| e.to_string()));
    match result {
        Ok(rep) => row(
            CERTIFICATE_CHECK,
            rep.replayed > 0 && rep.all_reproduced(),
            format!("{} accepted, {} replayed as accepted", rep.replayed, rep.reproduced),
            expected,
        ),
        Err(e) => row(CERTIFICATE_CHECK, false, format!("error: {e}"), expected),
    }
}

pub fn render_table(rows: &[CheckRow]) -> String {
    let w = rows.iter().map(|r| r.name.len()).max().unwrap_or(5).max(5);
    let mut out = String::new();
    let _ = writeln!(out, "{:<w$}  {:<6}  {:<40}  expected", "check", "result", "observed");
    for r in rows {
        let _ = writeln!(
            out,
            "{:<w$}  {:<6}  {:<40}  {}",
            r.name,
            if r.pass { "PASS" } else { "FAIL" },
            r.observed,
            r.expected
        );
    }
    out
}
