//! Operator abstraction, merit function and derivative checks.

use alloc::vec::Vec;
use core::ops::Deref;

use crate::error::ViError;
use crate::rng::BatchKey;
use crate::{Matrix, Vector};

/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// An iterate `z ∈ ℝ^d`. Entries are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vector);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self, ViError> {
        Self::from_vector(Vector::from_vec(coords))
    }

    pub fn from_vector(v: Vector) -> Result<Self, ViError> {
        if v.iter().all(|x| x.is_finite()) {
            Ok(Point(v))
        } else {
            Err(ViError::NonFinite {
                context: "point construction",
                point: v.as_slice().to_vec(),
            })
        }
    }

    pub fn zeros(d: usize) -> Self {
        Point(Vector::zeros(d))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &Vector {
        &self.0
    }

    pub fn into_vector(self) -> Vector {
        self.0
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.as_slice().to_vec()
    }

    /// `self − step·direction`, failing if the result is not finite.
    pub fn step(&self, step: f64, direction: &Vector) -> Result<Point, ViError> {
        Point::from_vector(&self.0 - direction * step)
    }
}

impl Deref for Point {
    type Target = Vector;

    fn deref(&self) -> &Vector {
        &self.0
    }
}

/// Regularity constants of a problem. Unknown values are `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RegularityMeta {
    /// Lipschitz constant of `V`.
    pub lipschitz: Option<f64>,
    /// Lipschitz constant of the Jacobian `∇V`.
    pub jacobian_lipschitz: Option<f64>,
    /// Mean-squared smoothness of the sampled operator.
    pub mean_sq_smoothness: Option<f64>,
    /// Dissipativity constant `μ`.
    pub dissipativity: Option<f64>,
    /// Bound on `‖V‖` over the working region.
    pub operator_bound: Option<f64>,
}

/// A stochastic variational inequality: find `z*` with `E[V(z*; ξ)] = 0`.
///
/// Implementations must be pure: [`sampled`](Self::sampled) with a fixed key is
/// a deterministic function of the point, and averaging it over keys recovers
/// [`population`](Self::population). The raw methods receive vectors of the
/// declared dimension; use the checked free functions in this module from
/// outside.
pub trait StochasticProblem: Send + Sync {
    fn dim(&self) -> usize;

    /// `V(z)`.
    fn population(&self, z: &Vector) -> Vector;

    /// `V(z; ξ)` for the sample identified by `key`.
    fn sampled(&self, z: &Vector, key: &BatchKey) -> Vector;

    /// `∇V(z)`, when known in closed form.
    fn jacobian(&self, _z: &Vector) -> Option<Matrix> {
        None
    }

    /// Noise variance `σ²` of the sampled operator, when it is a constant.
    fn noise_level(&self) -> Option<f64>;

    fn regularity(&self) -> RegularityMeta;

    /// Mini-batch size solvers use when the caller does not choose one.
    fn default_batch_size(&self) -> usize {
        1
    }
}

fn check_dim(problem: &dyn StochasticProblem, z: &Point) -> Result<(), ViError> {
    if z.dim() != problem.dim() {
        return Err(ViError::DimensionMismatch {
            expected: problem.dim(),
            got: z.dim(),
        });
    }
    Ok(())
}

fn check_finite(v: Vector, context: &'static str, z: &Point) -> Result<Vector, ViError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(ViError::NonFinite {
            context,
            point: z.to_vec(),
        })
    }
}

/// Population operator `V(z)`.
pub fn eval_population(problem: &dyn StochasticProblem, z: &Point) -> Result<Vector, ViError> {
    check_dim(problem, z)?;
    check_finite(problem.population(z), "population operator", z)
}

/// Sampled operator `V(z; ξ)`.
pub fn eval_sampled(problem: &dyn StochasticProblem, z: &Point, key: &BatchKey) -> Result<Vector, ViError> {
    check_dim(problem, z)?;
    check_finite(problem.sampled(z, key), "sampled operator", z)
}

/// Merit `½‖V(z)‖²`.
pub fn merit(problem: &dyn StochasticProblem, z: &Point) -> Result<f64, ViError> {
    let v = eval_population(problem, z)?;
    Ok(0.5 * v.norm_squared())
}

/// Where [`merit_gradient`] gets the Jacobian from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JacobianSource {
    /// Require the problem's analytic Jacobian.
    Analytic,
    /// Use the analytic Jacobian when present, central differences otherwise.
    FallbackFd { step: f64 },
}

impl Default for JacobianSource {
    fn default() -> Self {
        JacobianSource::FallbackFd { step: DEFAULT_FD_STEP }
    }
}

/// Jacobian of `V` at `z` according to `source`.
pub fn jacobian(problem: &dyn StochasticProblem, z: &Point, source: JacobianSource) -> Result<Matrix, ViError> {
    check_dim(problem, z)?;
    match (problem.jacobian(z), source) {
        (Some(j), _) => {
            if j.iter().all(|x| x.is_finite()) {
                Ok(j)
            } else {
                Err(ViError::NonFinite {
                    context: "analytic jacobian",
                    point: z.to_vec(),
                })
            }
        }
        (None, JacobianSource::Analytic) => Err(ViError::NoJacobian),
        (None, JacobianSource::FallbackFd { step }) => fd_jacobian(problem, z, step),
    }
}

/// Gradient of the merit function, `∇V(z)ᵀ V(z)`.
pub fn merit_gradient(problem: &dyn StochasticProblem, z: &Point, source: JacobianSource) -> Result<Vector, ViError> {
    let j = jacobian(problem, z, source)?;
    let v = eval_population(problem, z)?;
    Ok(j.tr_mul(&v))
}

/// Central-difference Jacobian; column `j` is `(V(z + h e_j) − V(z − h e_j)) / 2h`.
pub fn fd_jacobian(problem: &dyn StochasticProblem, z: &Point, h: f64) -> Result<Matrix, ViError> {
    if !(h > 0.0) {
        return Err(ViError::contract("finite-difference step must be positive"));
    }
    check_dim(problem, z)?;
    let d = problem.dim();
    let mut jac = Matrix::zeros(d, d);
    let mut probe = z.as_vector().clone();
    for j in 0..d {
        let orig = probe[j];
        probe[j] = orig + h;
        let plus = problem.population(&probe);
        probe[j] = orig - h;
        let minus = problem.population(&probe);
        probe[j] = orig;
        let col = (plus - minus) / (2.0 * h);
        jac.set_column(j, &col);
    }
    if jac.iter().all(|x| x.is_finite()) {
        Ok(jac)
    } else {
        Err(ViError::NonFinite {
            context: "finite-difference jacobian",
            point: z.to_vec(),
        })
    }
}

/// Central-difference gradient of a scalar function.
pub fn fd_gradient<F>(f: F, z: &Vector, h: f64) -> Vector
where
    F: Fn(&Vector) -> f64,
{
    let mut probe = z.clone();
    Vector::from_fn(z.len(), |i, _| {
        let orig = probe[i];
        probe[i] = orig + h;
        let plus = f(&probe);
        probe[i] = orig - h;
        let minus = f(&probe);
        probe[i] = orig;
        (plus - minus) / (2.0 * h)
    })
}

/// `‖a − b‖ / max(‖b‖, floor)`.
pub fn relative_error(a: &Vector, b: &Vector, floor: f64) -> f64 {
    (a - b).norm() / b.norm().max(floor)
}
