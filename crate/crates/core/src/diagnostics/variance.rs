use alloc::vec::Vec;

use crate::error::ViError;
use crate::estimators::{estimator_error, storm_init, storm_update};
use crate::problems::LinearGame;
use crate::rng::{derive_seed, BatchKey};
use crate::vi::Point;

/// Steps run before the measured step, so `e_{t−1}` is not a fresh sample.
const WARMUP: u64 = 3;

/// One `(σ², α, ‖Δz‖)` cell of the variance recursion check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceCell {
    pub sigma2: f64,
    pub alpha: f64,
    pub dz: f64,
    /// Monte Carlo `E‖e_{t−1}‖²`.
    pub prev_mse: f64,
    /// Monte Carlo `E‖e_t‖²`.
    pub mse: f64,
    /// `(1−α)² E‖e_{t−1}‖² + 2L²‖Δz‖² + 2α²σ²` with `L = 1`.
    pub bound: f64,
    /// Standard error of `‖e_t‖² − (1−α)²‖e_{t−1}‖²`.
    pub std_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceReport {
    pub cells: Vec<VarianceCell>,
    pub n_mc: usize,
    /// Fraction of cells inside the bound plus three standard errors.
    pub pass_fraction: f64,
    pub pass: bool,
}

/// Monte Carlo check of the STORM error recursion on `V(z) = z` in one
/// dimension with additive `N(0, σ²)` noise. Every cell moves the iterate
/// by `Δz` per step, warms the estimator up, then compares
/// `E‖e_t‖²` with the bound. The check passes when at least 99% of cells
/// satisfy `E‖e_t‖² ≤ bound + 3·SE`.
pub fn check_variance_recursion(
    sigma2_grid: &[f64],
    alpha_grid: &[f64],
    dz_grid: &[f64],
    n_mc: usize,
    seed: u64,
) -> Result<VarianceReport, ViError> {
    if n_mc < 10_000 {
        return Err(ViError::contract("at least 10^4 Monte Carlo repetitions are required"));
    }
    let lipschitz = 1.0;
    let mut cells = Vec::new();
    let mut index = 0u64;
    for &sigma2 in sigma2_grid {
        let problem = LinearGame::identity(1, sigma2)?;
        for &alpha in alpha_grid {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(ViError::contract("alpha must lie in (0, 1]"));
            }
            for &dz in dz_grid {
                let cell_seed = derive_seed(seed, index);
                index += 1;
                let keep = (1.0 - alpha) * (1.0 - alpha);
                let (mut sum_prev, mut sum_cur) = (0.0, 0.0);
                let (mut sum_diff, mut sum_diff_sq) = (0.0, 0.0);
                for rep in 0..n_mc as u64 {
                    let base = rep * (WARMUP + 2);
                    let mut z = Point::new(alloc::vec![0.0])?;
                    let mut state = storm_init(&problem, &z, &BatchKey::new(cell_seed, base), alpha)?;
                    let mut prev = 0.0;
                    for s in 1..=WARMUP + 1 {
                        if s == WARMUP + 1 {
                            prev = estimator_error(state.direction(), &problem, &z)?;
                        }
                        z = Point::new(alloc::vec![z[0] + dz])?;
                        let (next, _) = storm_update(state, &problem, &z, &BatchKey::new(cell_seed, base + s))?;
                        state = next;
                    }
                    let cur = estimator_error(state.direction(), &problem, &z)?;
                    let diff = cur - keep * prev;
                    sum_prev += prev;
                    sum_cur += cur;
                    sum_diff += diff;
                    sum_diff_sq += diff * diff;
                }
                let n = n_mc as f64;
                let prev_mse = sum_prev / n;
                let mse = sum_cur / n;
                let mean_diff = sum_diff / n;
                let var_diff = ((sum_diff_sq / n - mean_diff * mean_diff) * n / (n - 1.0)).max(0.0);
                let std_error = libm::sqrt(var_diff / n);
                let drift = 2.0 * lipschitz * lipschitz * dz * dz + 2.0 * alpha * alpha * sigma2;
                let bound = keep * prev_mse + drift;
                cells.push(VarianceCell {
                    sigma2,
                    alpha,
                    dz,
                    prev_mse,
                    mse,
                    bound,
                    std_error,
                    pass: mean_diff <= drift + 3.0 * std_error,
                });
            }
        }
    }
    let passed = cells.iter().filter(|c| c.pass).count();
    let pass_fraction = if cells.is_empty() {
        1.0
    } else {
        passed as f64 / cells.len() as f64
    };
    Ok(VarianceReport {
        cells,
        n_mc,
        pass_fraction,
        pass: pass_fraction >= 0.99,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_error_vanishes() {
        let r = check_variance_recursion(&[0.0], &[0.1, 1.0], &[0.0, 0.1], 10_000, 1).unwrap();
        for c in &r.cells {
            assert!(c.mse < 1e-28 && c.prev_mse < 1e-28, "{c:?}");
            assert!(c.pass);
        }
    }

    #[test]
    fn unit_momentum_is_fresh_sample_variance() {
        // α = 1: d_t = V(z_t; ξ_t), so E‖e_t‖² = σ² in one dimension, below 2σ².
        let r = check_variance_recursion(&[2.25], &[1.0], &[0.0], 10_000, 2).unwrap();
        let c = r.cells[0];
        assert!((c.bound - 4.5).abs() < 1e-12);
        assert!((c.mse - 2.25).abs() < 0.1, "{c:?}");
        assert!(c.pass);
    }

    #[test]
    fn too_few_repetitions() {
        assert!(check_variance_recursion(&[1.0], &[0.5], &[0.0], 100, 0).is_err());
    }
}
