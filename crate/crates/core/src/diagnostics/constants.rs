use alloc::format;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::ViError;
use crate::vi::{eval_population, jacobian, merit_gradient, JacobianSource, Point, StochasticProblem};
use crate::{Matrix, Vector};

/// Radius of the default sampling ball.
pub const DEFAULT_RADIUS: f64 = 5.0;

/// Closed ball the estimators sample from. Local constants only mean
/// something relative to the region, so reports carry it along.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub center: Vector,
    pub radius: f64,
}

impl Region {
    pub fn ball(center: Vector, radius: f64) -> Self {
        Self { center, radius }
    }

    /// Ball of [`DEFAULT_RADIUS`] around the origin of `ℝ^d`.
    pub fn origin(d: usize) -> Self {
        Self::ball(Vector::zeros(d), DEFAULT_RADIUS)
    }

    /// Uniform draw from the ball.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let d = self.center.len();
        let dir = Vector::from_fn(d, |_, _| StandardNormal.sample(rng));
        let n = dir.norm();
        let u: f64 = rng.random();
        let r = self.radius * libm::pow(u, 1.0 / d as f64);
        let offset = if n > 0.0 { dir * (r / n) } else { Vector::zeros(d) };
        Point::from_vector(&self.center + offset).expect("finite sample")
    }
}

fn check_region(problem: &dyn StochasticProblem, region: &Region) -> Result<(), ViError> {
    if region.center.len() != problem.dim() {
        return Err(ViError::DimensionMismatch {
            expected: problem.dim(),
            got: region.center.len(),
        });
    }
    if !(region.radius > 0.0) {
        return Err(ViError::contract("region radius must be positive"));
    }
    Ok(())
}

const MIN_SEPARATION: f64 = 1e-12;

/// `max ‖V(x) − V(y)‖ / ‖x − y‖` over `n_pairs` random pairs in `region`.
/// Pairs closer than 1e-12 are skipped.
pub fn estimate_lipschitz(
    problem: &dyn StochasticProblem,
    region: &Region,
    n_pairs: usize,
    seed: u64,
) -> Result<f64, ViError> {
    if n_pairs < 100 {
        return Err(ViError::contract("at least 100 pairs are required"));
    }
    check_region(problem, region)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for _ in 0..n_pairs {
        let x = region.sample(&mut rng);
        let y = region.sample(&mut rng);
        let dist = (x.as_vector() - y.as_vector()).norm();
        if dist < MIN_SEPARATION {
            continue;
        }
        let dv = eval_population(problem, &x)? - eval_population(problem, &y)?;
        best = best.max(dv.norm() / dist);
    }
    Ok(best)
}

/// `min ⟨∇V(z)ᵀV(z), V(z)⟩ / ‖V(z)‖²` over `n_points` random points with
/// `‖V(z)‖ > 1e-8`.
pub fn estimate_dissipativity(
    problem: &dyn StochasticProblem,
    region: &Region,
    n_points: usize,
    seed: u64,
    source: JacobianSource,
) -> Result<f64, ViError> {
    check_region(problem, region)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<f64> = None;
    for _ in 0..n_points {
        let z = region.sample(&mut rng);
        let v = eval_population(problem, &z)?;
        let sq = v.norm_squared();
        if libm::sqrt(sq) <= 1e-8 {
            continue;
        }
        let g = merit_gradient(problem, &z, source)?;
        let ratio = g.dot(&v) / sq;
        best = Some(best.map_or(ratio, |b| b.min(ratio)));
    }
    best.ok_or_else(|| ViError::Inconclusive(format!("all {n_points} sampled points had a vanishing operator")))
}

/// `max ‖∇V(x) − ∇V(y)‖₂ / ‖x − y‖` over random pairs in `region`.
pub fn estimate_jacobian_lipschitz(
    problem: &dyn StochasticProblem,
    region: &Region,
    n_pairs: usize,
    seed: u64,
    source: JacobianSource,
) -> Result<f64, ViError> {
    check_region(problem, region)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for _ in 0..n_pairs {
        let x = region.sample(&mut rng);
        let y = region.sample(&mut rng);
        let dist = (x.as_vector() - y.as_vector()).norm();
        if dist < MIN_SEPARATION {
            continue;
        }
        let dj = jacobian(problem, &x, source)? - jacobian(problem, &y, source)?;
        best = best.max(spectral_norm(&dj) / dist);
    }
    Ok(best)
}

/// Largest singular value by power iteration on `MᵀM`.
pub fn spectral_norm(m: &Matrix) -> f64 {
    let n = m.ncols();
    if n == 0 || m.amax() == 0.0 {
        return 0.0;
    }
    let mut v = Vector::from_element(n, 1.0 / libm::sqrt(n as f64));
    // A deterministic start that is unlikely to be orthogonal to the top
    // singular vector.
    for (i, x) in v.iter_mut().enumerate() {
        *x *= 1.0 + 0.01 * i as f64;
    }
    let mut sigma = 0.0;
    for _ in 0..200 {
        let w = m.tr_mul(&(m * &v));
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = libm::sqrt(norm / v.norm());
        v = w / norm;
        if (next - sigma).abs() <= 1e-14 * next {
            return next;
        }
        sigma = next;
    }
    (m * &v).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{make_bilinear, make_quadratic, LinearGame};

    #[test]
    fn lipschitz_of_linear_games() {
        let bil = make_bilinear(0.0).unwrap();
        let l = estimate_lipschitz(&bil, &Region::origin(2), 200, 1).unwrap();
        assert!((l - 1.0).abs() < 1e-9);
        let quad = make_quadratic(0.5, 0.0).unwrap();
        let l = estimate_lipschitz(&quad, &Region::origin(2), 200, 1).unwrap();
        assert!((l - libm::sqrt(1.25)).abs() < 1e-6);
        let zero = LinearGame::zero(3);
        assert_eq!(estimate_lipschitz(&zero, &Region::origin(3), 100, 1).unwrap(), 0.0);
        assert!(estimate_lipschitz(&zero, &Region::origin(3), 99, 1).is_err());
    }

    #[test]
    fn dissipativity_of_linear_games() {
        let src = JacobianSource::Analytic;
        let bil = make_bilinear(0.0).unwrap();
        let mu = estimate_dissipativity(&bil, &Region::origin(2), 200, 2, src).unwrap();
        assert!(mu.abs() < 1e-9);
        for m in [0.5, 2.0] {
            let q = make_quadratic(m, 0.0).unwrap();
            let est = estimate_dissipativity(&q, &Region::origin(2), 200, 2, src).unwrap();
            assert!((est - m).abs() < 1e-9);
        }
    }

    #[test]
    fn dissipativity_inconclusive_on_zero_operator() {
        let zero = LinearGame::zero(2);
        let err = estimate_dissipativity(&zero, &Region::origin(2), 50, 0, JacobianSource::Analytic).unwrap_err();
        assert!(matches!(err, ViError::Inconclusive(_)));
    }

    #[test]
    fn more_pairs_never_lower_a_max_estimate() {
        let q = LinearGame::from_matrix(
            Matrix::from_row_slice(2, 2, &[2.0, 0.3, -0.1, 0.4]),
            0.0,
            Default::default(),
        )
        .unwrap();
        let small = estimate_lipschitz(&q, &Region::origin(2), 100, 7).unwrap();
        let large = estimate_lipschitz(&q, &Region::origin(2), 1000, 7).unwrap();
        assert!(large >= small);
        assert!(large <= spectral_norm(q.matrix()) + 1e-12);
    }

    #[test]
    fn spectral_norm_matches_known_values() {
        let a = Matrix::from_row_slice(2, 2, &[0.5, 1.0, -1.0, 0.5]);
        assert!((spectral_norm(&a) - libm::sqrt(1.25)).abs() < 1e-12);
        let d = Matrix::from_diagonal(&Vector::from_vec(alloc::vec![1.0, -3.0, 2.0]));
        assert!((spectral_norm(&d) - 3.0).abs() < 1e-10);
        assert_eq!(spectral_norm(&Matrix::zeros(3, 3)), 0.0);
    }

    #[test]
    fn region_samples_stay_inside() {
        let r = Region::ball(Vector::from_vec(alloc::vec![1.0, -1.0, 0.0]), 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..500 {
            let p = r.sample(&mut rng);
            assert!((p.as_vector() - &r.center).norm() <= 0.5 + 1e-12);
        }
    }
}
