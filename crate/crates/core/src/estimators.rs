//! STORM recursive-momentum operator estimation.
//!
//! The estimator keeps a direction `d_t ≈ V(z_t)` and refreshes it with
//!
//! ```text
//! d_t = V(z_t; ξ_t) + (1 − α_t) (d_{t−1} − V(z_{t−1}; ξ_t))
//! ```
//!
//! Both evaluations share the batch `ξ_t`, so the correction term cancels the
//! noise common to the two points and the error decays as the iterates settle.

use crate::error::ViError;
use crate::rng::BatchKey;
use crate::vi::{eval_population, eval_sampled, Point, StochasticProblem};
use crate::Vector;

/// Smallest momentum the schedule will produce.
pub const MIN_ALPHA: f64 = 1e-6;

/// Estimator state carried between iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct StormState {
    direction: Vector,
    z_prev: Point,
    alpha: f64,
    oracle_calls: u64,
}

impl StormState {
    /// Current direction `d_t`.
    pub fn direction(&self) -> &Vector {
        &self.direction
    }

    /// Iterate the current direction was built at.
    pub fn anchor(&self) -> &Point {
        &self.z_prev
    }

    /// Momentum `α` the next update will use.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn oracle_calls(&self) -> u64 {
        self.oracle_calls
    }

    /// Replaces the momentum used by the next update, clamped to `[MIN_ALPHA, 1]`.
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = clamp_alpha(alpha);
        self
    }
}

fn clamp_alpha(alpha: f64) -> f64 {
    if alpha.is_nan() {
        return 1.0;
    }
    alpha.clamp(MIN_ALPHA, 1.0)
}

/// `d_0 = V(z_0; ξ_0)` with the first update's momentum set to `alpha`.
pub fn storm_init(
    problem: &dyn StochasticProblem,
    z0: &Point,
    key0: &BatchKey,
    alpha: f64,
) -> Result<StormState, ViError> {
    let direction = eval_sampled(problem, z0, key0)?;
    Ok(StormState {
        direction,
        z_prev: z0.clone(),
        alpha: clamp_alpha(alpha),
        oracle_calls: 1,
    })
}

/// One recursive update at `z_new` with batch `key`.
///
/// Returns the new state and `g_curr = V(z_new; ξ)`, which the line search
/// must reuse as its reference value.
pub fn storm_update(
    state: StormState,
    problem: &dyn StochasticProblem,
    z_new: &Point,
    key: &BatchKey,
) -> Result<(StormState, Vector), ViError> {
    let g_prev = eval_sampled(problem, &state.z_prev, key)?;
    let g_curr = eval_sampled(problem, z_new, key)?;
    let keep = 1.0 - state.alpha;
    let direction = &g_curr + (state.direction - g_prev) * keep;
    if !direction.iter().all(|x| x.is_finite()) {
        return Err(ViError::NonFinite {
            context: "storm direction",
            point: z_new.to_vec(),
        });
    }
    let next = StormState {
        direction,
        z_prev: z_new.clone(),
        alpha: state.alpha,
        oracle_calls: state.oracle_calls + 2,
    };
    Ok((next, g_curr))
}

/// Coupled decay `α = clamp(c_α η², MIN_ALPHA, 1)`.
pub fn momentum_schedule(eta_prev: f64, c_alpha: f64) -> Result<f64, ViError> {
    if !(eta_prev > 0.0) || !(c_alpha > 0.0) {
        return Err(ViError::contract("step and c_alpha must be positive"));
    }
    Ok(clamp_alpha(c_alpha * eta_prev * eta_prev))
}

/// `‖d − V(z)‖²` against the population operator. Not an oracle call.
pub fn estimator_error(direction: &Vector, problem: &dyn StochasticProblem, z: &Point) -> Result<f64, ViError> {
    let v = eval_population(problem, z)?;
    Ok((direction - v).norm_squared())
}
