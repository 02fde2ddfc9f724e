use rand_distr::{Distribution, StandardNormal};

use crate::error::ViError;
use crate::rng::BatchKey;
use crate::vi::{RegularityMeta, StochasticProblem};
use crate::{Matrix, Vector};

/// Linear operator `V(z) = A z` observed through additive Gaussian noise,
/// `V(z; ξ) = A z + ε` with `ε ~ N(0, σ²/b · I)` for batch size `b`.
#[derive(Debug, Clone)]
pub struct LinearGame {
    matrix: Matrix,
    sigma2: f64,
    regularity: RegularityMeta,
}

impl LinearGame {
    pub fn from_matrix(matrix: Matrix, sigma2: f64, regularity: RegularityMeta) -> Result<Self, ViError> {
        if !matrix.is_square() {
            return Err(ViError::contract("operator matrix must be square"));
        }
        if !(sigma2 >= 0.0) || !sigma2.is_finite() {
            return Err(ViError::contract("noise variance must be finite and non-negative"));
        }
        Ok(Self {
            matrix,
            sigma2,
            regularity,
        })
    }

    /// `A = [[μ I, I], [−I, μ I]]` on `z = (x, y)` with `n` coordinates per player.
    pub fn coupled(mu: f64, n: usize, sigma2: f64) -> Result<Self, ViError> {
        if n == 0 {
            return Err(ViError::contract("players need at least one coordinate"));
        }
        let mut a = Matrix::zeros(2 * n, 2 * n);
        for k in 0..n {
            a[(k, k)] = mu;
            a[(k, n + k)] = 1.0;
            a[(n + k, k)] = -1.0;
            a[(n + k, n + k)] = mu;
        }
        let regularity = RegularityMeta {
            lipschitz: Some(libm::sqrt(mu * mu + 1.0)),
            jacobian_lipschitz: Some(0.0),
            mean_sq_smoothness: Some(0.0),
            dissipativity: Some(mu),
            operator_bound: None,
        };
        Self::from_matrix(a, sigma2, regularity)
    }

    /// Dissipative quadratic game with `n` coordinates per player.
    pub fn quadratic(mu: f64, n: usize, sigma2: f64) -> Result<Self, ViError> {
        if !(mu > 0.0) {
            return Err(ViError::contract("dissipativity constant must be positive"));
        }
        Self::coupled(mu, n, sigma2)
    }

    /// `V(z) = z` in `d` dimensions.
    pub fn identity(d: usize, sigma2: f64) -> Result<Self, ViError> {
        let regularity = RegularityMeta {
            lipschitz: Some(1.0),
            jacobian_lipschitz: Some(0.0),
            mean_sq_smoothness: Some(0.0),
            dissipativity: Some(1.0),
            operator_bound: None,
        };
        Self::from_matrix(Matrix::identity(d, d), sigma2, regularity)
    }

    /// `V ≡ 0` in `d` dimensions.
    pub fn zero(d: usize) -> Self {
        let regularity = RegularityMeta {
            lipschitz: Some(0.0),
            jacobian_lipschitz: Some(0.0),
            mean_sq_smoothness: Some(0.0),
            dissipativity: None,
            operator_bound: Some(0.0),
        };
        Self {
            matrix: Matrix::zeros(d, d),
            sigma2: 0.0,
            regularity,
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Noise vector `ε` drawn for `key`.
    pub fn noise(&self, key: &BatchKey) -> Vector {
        let d = self.matrix.nrows();
        if self.sigma2 == 0.0 {
            return Vector::zeros(d);
        }
        let mut rng = key.rng();
        let b = key.batch_size();
        let mut eps = Vector::zeros(d);
        for _ in 0..b {
            for e in eps.iter_mut() {
                let n: f64 = StandardNormal.sample(&mut rng);
                *e += n;
            }
        }
        eps * (libm::sqrt(self.sigma2) / b as f64)
    }
}

impl StochasticProblem for LinearGame {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn population(&self, z: &Vector) -> Vector {
        &self.matrix * z
    }

    fn sampled(&self, z: &Vector, key: &BatchKey) -> Vector {
        let v = self.population(z);
        if self.sigma2 == 0.0 {
            v
        } else {
            v + self.noise(key)
        }
    }

    fn jacobian(&self, _z: &Vector) -> Option<Matrix> {
        Some(self.matrix.clone())
    }

    fn noise_level(&self) -> Option<f64> {
        Some(self.sigma2)
    }

    fn regularity(&self) -> RegularityMeta {
        self.regularity
    }
}

/// `min_θ max_φ θφ`: `V(θ, φ) = (φ, −θ)`, Jacobian eigenvalues `±i`, `μ = 0`.
pub fn make_bilinear(sigma2: f64) -> Result<LinearGame, ViError> {
    LinearGame::coupled(0.0, 1, sigma2)
}

/// Two-player game `V(z) = A z`, `A = [[μ, 1], [−1, μ]]`, `μ > 0`.
pub fn make_quadratic(mu: f64, sigma2: f64) -> Result<LinearGame, ViError> {
    LinearGame::quadratic(mu, 1, sigma2)
}
