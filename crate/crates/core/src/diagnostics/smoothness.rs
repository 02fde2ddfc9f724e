use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::ViError;
use crate::vi::{eval_population, merit_gradient, JacobianSource, StochasticProblem};

use super::constants::Region;

/// Outcome of the merit smoothness check `‖∇M(x) − ∇M(y)‖ ≤ (L² + B·L_H) ‖x − y‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessReport {
    /// Largest observed ratio `‖∇M(x) − ∇M(y)‖ / ‖x − y‖`.
    pub observed: f64,
    /// `L² + B·L_H`.
    pub bound: f64,
    pub lipschitz: f64,
    pub jacobian_lipschitz: f64,
    pub operator_bound: f64,
    pub pairs: usize,
    pub region: Region,
    pub pass: bool,
}

/// Samples `n_pairs` pairs from `region` (keeping only points with
/// `‖V‖ ≤ operator_bound`) and compares the merit-gradient Lipschitz ratio
/// with `L² + B·L_H`. Passes iff `observed ≤ bound · (1 + 1e-6)`.
#[allow(clippy::too_many_arguments)]
pub fn check_merit_smoothness(
    problem: &dyn StochasticProblem,
    operator_bound: f64,
    lipschitz: f64,
    jacobian_lipschitz: f64,
    region: &Region,
    n_pairs: usize,
    seed: u64,
    source: JacobianSource,
) -> Result<SmoothnessReport, ViError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_draws = 100 * n_pairs.max(1);
    let draw = |rng: &mut ChaCha8Rng| -> Result<Option<crate::vi::Point>, ViError> {
        for _ in 0..100 {
            let z = region.sample(rng);
            if eval_population(problem, &z)?.norm() <= operator_bound {
                return Ok(Some(z));
            }
        }
        Ok(None)
    };
    let mut observed = 0.0f64;
    let mut pairs = 0usize;
    let mut draws = 0usize;
    while pairs < n_pairs && draws < max_draws {
        draws += 1;
        let (Some(x), Some(y)) = (draw(&mut rng)?, draw(&mut rng)?) else {
            continue;
        };
        let dist = (x.as_vector() - y.as_vector()).norm();
        if dist < 1e-12 {
            continue;
        }
        let dg = merit_gradient(problem, &x, source)? - merit_gradient(problem, &y, source)?;
        observed = observed.max(dg.norm() / dist);
        pairs += 1;
    }
    if pairs == 0 {
        return Err(ViError::Inconclusive(alloc::format!(
            "no sampled points satisfy ‖V‖ ≤ {operator_bound}"
        )));
    }
    let bound = lipschitz * lipschitz + operator_bound * jacobian_lipschitz;
    Ok(SmoothnessReport {
        observed,
        bound,
        lipschitz,
        jacobian_lipschitz,
        operator_bound,
        pairs,
        region: region.clone(),
        pass: observed <= bound * (1.0 + 1e-6),
    })
}
