//! Same-batch curvature verification.
//!
//! A step `η` along `−d` is accepted when the sampled operator, re-evaluated
//! on the batch that produced `g_curr`, moves no more than the step allows:
//!
//! ```text
//! ‖V(z − η d; ξ) − V(z; ξ)‖ ≤ c · η · ‖d‖
//! ```
//!
//! Otherwise `η` shrinks by `β` and the probe is repeated. For a linear
//! operator both sides scale with `η`, so the outcome does not depend on the
//! step: pick `c` at least as large as the local Lipschitz constant of `V`, or
//! every step lands on the floor.

use crate::error::ViError;
use crate::rng::BatchKey;
use crate::vi::{eval_sampled, Point, StochasticProblem};
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchConfig {
    /// Curvature constant `c`.
    pub c: f64,
    /// Shrink factor `β ∈ (0, 1)`.
    pub beta: f64,
    pub eta_max: f64,
    pub max_backtracks: u32,
    /// Smallest step tried; the search stops before going below it.
    pub eta_floor: f64,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        Self::new(1.0, 0.5, 1.0)
    }
}

impl LineSearchConfig {
    /// Config with 40 backtracks and the floor at `η_max · β⁴⁰`.
    pub fn new(c: f64, beta: f64, eta_max: f64) -> Self {
        let max_backtracks = 40;
        Self {
            c,
            beta,
            eta_max,
            max_backtracks,
            eta_floor: eta_max * libm::pow(beta, max_backtracks as f64),
        }
    }

    pub fn validate(&self) -> Result<(), ViError> {
        if !(self.c >= 0.0) || !self.c.is_finite() {
            return Err(ViError::contract(
                "curvature constant c must be finite and non-negative",
            ));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(ViError::contract("backtrack factor must lie in (0, 1)"));
        }
        if !(self.eta_max > 0.0) || !self.eta_max.is_finite() {
            return Err(ViError::contract("eta_max must be positive"));
        }
        if !(self.eta_floor > 0.0) || self.eta_floor > self.eta_max {
            return Err(ViError::contract("eta_floor must lie in (0, eta_max]"));
        }
        if self.max_backtracks == 0 {
            return Err(ViError::contract("max_backtracks must be positive"));
        }
        Ok(())
    }

    /// `η_max · β^k`.
    pub fn step_at(&self, backtracks: u32) -> f64 {
        self.eta_max * libm::pow(self.beta, backtracks as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchResult {
    pub eta: f64,
    pub z_candidate: Point,
    pub backtracks: u32,
    /// Oracle calls spent on probes.
    pub probe_calls: u64,
    /// False when the search stopped at the floor without passing the check.
    pub accepted: bool,
    /// `‖V(z_candidate; ξ) − g_curr‖` of the last probe (0 without probes).
    pub displacement: f64,
}

/// The acceptance test itself. Equality passes.
pub fn curvature_condition(displacement: f64, c: f64, eta: f64, direction_norm: f64) -> bool {
    !(displacement > c * eta * direction_norm)
}

/// Backtracking from `η_max`. `g_curr` must be `V(z; key)`.
pub fn curvature_backtrack(
    problem: &dyn StochasticProblem,
    z: &Point,
    d: &Vector,
    g_curr: &Vector,
    key: &BatchKey,
    cfg: &LineSearchConfig,
) -> Result<LineSearchResult, ViError> {
    curvature_backtrack_from(problem, z, d, g_curr, key, cfg, 0)
}

/// Like [`curvature_backtrack`] but starting `start` steps down the lattice.
pub fn curvature_backtrack_from(
    problem: &dyn StochasticProblem,
    z: &Point,
    d: &Vector,
    g_curr: &Vector,
    key: &BatchKey,
    cfg: &LineSearchConfig,
    start: u32,
) -> Result<LineSearchResult, ViError> {
    let d_norm = d.norm();
    if d_norm == 0.0 {
        return Ok(LineSearchResult {
            eta: cfg.eta_max,
            z_candidate: z.clone(),
            backtracks: 0,
            probe_calls: 0,
            accepted: true,
            displacement: 0.0,
        });
    }
    let mut k = start.min(cfg.max_backtracks);
    let mut probes = 0u64;
    loop {
        let eta = cfg.step_at(k);
        let candidate = z.step(eta, d)?;
        let probe = eval_sampled(problem, &candidate, key)?;
        probes += 1;
        let displacement = (probe - g_curr).norm();
        if !displacement.is_finite() {
            return Err(ViError::NonFinite {
                context: "line-search probe",
                point: candidate.to_vec(),
            });
        }
        let passed = curvature_condition(displacement, cfg.c, eta, d_norm);
        let at_floor = k >= cfg.max_backtracks || cfg.step_at(k + 1) < cfg.eta_floor;
        if passed || at_floor {
            return Ok(LineSearchResult {
                eta,
                z_candidate: candidate,
                backtracks: k,
                probe_calls: probes,
                accepted: passed,
                displacement,
            });
        }
        k += 1;
    }
}

/// Observed `‖ΔV‖ / (η ‖d‖)` of a search result.
pub fn effective_lipschitz(result: &LineSearchResult, d: &Vector) -> Result<f64, ViError> {
    let d_norm = d.norm();
    if d_norm == 0.0 {
        return Err(ViError::contract("effective Lipschitz ratio needs a nonzero direction"));
    }
    Ok(result.displacement / (result.eta * d_norm))
}

/// Re-runs the acceptance test for a recorded step.
pub fn replay_certificate(
    problem: &dyn StochasticProblem,
    z: &Point,
    d: &Vector,
    eta: f64,
    key: &BatchKey,
    c: f64,
) -> Result<bool, ViError> {
    let g_curr = eval_sampled(problem, z, key)?;
    let candidate = z.step(eta, d)?;
    let probe = eval_sampled(problem, &candidate, key)?;
    Ok(curvature_condition((probe - g_curr).norm(), c, eta, d.norm()))
}
