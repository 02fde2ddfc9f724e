use alloc::vec::Vec;

use crate::error::ViError;
use crate::solvers::SolverTrace;

/// Least-squares fit of `log(value)` against `log(budget)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub budgets: Vec<f64>,
    pub values: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Fits the log-log slope. Needs at least four strictly increasing budgets
/// spanning 1.5 decades and positive values.
pub fn fit_rate(budgets: &[f64], values: &[f64]) -> Result<RateFit, ViError> {
    if budgets.len() != values.len() {
        return Err(ViError::contract("budgets and values differ in length"));
    }
    if budgets.len() < 4 {
        return Err(ViError::contract("at least four budgets are required"));
    }
    if budgets.windows(2).any(|w| !(w[1] > w[0])) || !(budgets[0] > 0.0) {
        return Err(ViError::contract("budgets must be positive and strictly increasing"));
    }
    if libm::log10(budgets[budgets.len() - 1] / budgets[0]) < 1.5 - 1e-12 {
        return Err(ViError::contract("budgets must span at least 1.5 decades"));
    }
    if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(ViError::contract("values must be positive and finite"));
    }
    let xs: Vec<f64> = budgets.iter().map(|b| libm::log(*b)).collect();
    let ys: Vec<f64> = values.iter().map(|v| libm::log(*v)).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(RateFit {
        budgets: budgets.to_vec(),
        values: values.to_vec(),
        slope,
        intercept,
        r2,
    })
}

/// For each budget, the seed-average of `min_{t ≤ T} ‖V(z_t)‖²` where the
/// minimum runs over the iterations a run with that budget performs. One
/// long run per seed serves every smaller budget because runs are
/// deterministic prefixes of each other.
pub fn rate_values(traces: &[SolverTrace], budgets: &[u64]) -> Result<Vec<f64>, ViError> {
    if traces.is_empty() {
        return Err(ViError::contract("no traces supplied"));
    }
    budgets
        .iter()
        .map(|&b| {
            let mut total = 0.0;
            for tr in traces {
                total += tr
                    .min_sq_op_norm_within(b)
                    .ok_or_else(|| ViError::contract("empty trace"))?;
            }
            Ok(total / traces.len() as f64)
        })
        .collect()
}
