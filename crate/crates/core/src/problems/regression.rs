use alloc::vec::Vec;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::ViError;
use crate::rng::BatchKey;
use crate::vi::{RegularityMeta, StochasticProblem};
use crate::{Matrix, Vector};

/// Adversary regularization used when none is configured.
pub const DEFAULT_LAMBDA: f64 = 1.0;
/// Noise standard deviation of outlier rows used when none is configured.
pub const DEFAULT_OUTLIER_SD: f64 = 10.0;
/// Noise standard deviation of inlier rows.
pub const INLIER_NOISE_SD: f64 = 0.1;
/// Rows per sampled mini-batch used when none is configured.
pub const DEFAULT_BATCH: usize = 10;

/// Synthetic linear-regression data with a contaminated subset.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionData {
    /// `N × D` design matrix.
    pub x: Matrix,
    pub y: Vector,
    pub w_true: Vector,
    /// Sorted indices of the outlier rows (empty when loaded from a file).
    pub outliers: Vec<usize>,
}

/// Draws `N` standard-normal rows, a standard-normal `w_true`, and responses
/// `y = Xw + ε`. `⌊fraction·N⌋` rows chosen by the seed get noise of standard
/// deviation `outlier_sd`; the rest get [`INLIER_NOISE_SD`].
pub fn generate_regression_data(
    n: usize,
    d: usize,
    outlier_fraction: f64,
    outlier_sd: f64,
    seed: u64,
) -> Result<RegressionData, ViError> {
    if n == 0 || d == 0 {
        return Err(ViError::contract("sample count and dimension must be positive"));
    }
    if !(0.0..1.0).contains(&outlier_fraction) {
        return Err(ViError::contract("outlier fraction must lie in [0, 1)"));
    }
    if !(outlier_sd > 0.0) || !outlier_sd.is_finite() {
        return Err(ViError::contract("outlier noise sd must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w_true = Vector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
    let mut x = Matrix::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            x[(i, j)] = StandardNormal.sample(&mut rng);
        }
    }
    let n_out = libm::floor(outlier_fraction * n as f64) as usize;
    let mut outliers = index::sample(&mut rng, n, n_out).into_vec();
    outliers.sort_unstable();

    let inlier = Normal::new(0.0, INLIER_NOISE_SD).expect("valid sd");
    let outlier = Normal::new(0.0, outlier_sd).expect("valid sd");
    let clean = &x * &w_true;
    let mut y = Vector::zeros(n);
    for i in 0..n {
        let eps = if outliers.binary_search(&i).is_ok() {
            outlier.sample(&mut rng)
        } else {
            inlier.sample(&mut rng)
        };
        y[i] = clean[i] + eps;
    }
    Ok(RegressionData { x, y, w_true, outliers })
}

/// `min_w max_q Σ_i q_i (wᵀx_i − y_i)² − λ q_i²` over `z = (w, q) ∈ ℝ^{D+N}`.
///
/// The operator is `V = (∇_w f, −∇_q f)`:
///
/// * `V_w = 2 Σ_i q_i r_i x_i`
/// * `V_{q_i} = 2λ q_i − r_i²`
///
/// with residuals `r_i = wᵀx_i − y_i`. The sampled operator draws `b` rows
/// uniformly without replacement and rescales by `N / b`.
#[derive(Debug, Clone)]
pub struct RobustRegression {
    x: Matrix,
    y: Vector,
    lambda: f64,
    batch: usize,
}

/// Builds the robust-regression game with the default batch size.
pub fn make_robust_regression(x: Matrix, y: Vector, lambda: f64) -> Result<RobustRegression, ViError> {
    let batch = DEFAULT_BATCH.min(y.len());
    RobustRegression::new(x, y, lambda, batch)
}

impl RobustRegression {
    pub fn new(x: Matrix, y: Vector, lambda: f64, batch: usize) -> Result<Self, ViError> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(ViError::contract("lambda must be positive"));
        }
        if x.nrows() != y.len() || x.nrows() == 0 || x.ncols() == 0 {
            return Err(ViError::contract("design matrix and responses disagree in shape"));
        }
        if batch == 0 || batch > y.len() {
            return Err(ViError::contract("batch size must lie in 1..=N"));
        }
        Ok(Self { x, y, lambda, batch })
    }

    pub fn samples(&self) -> usize {
        self.x.nrows()
    }

    pub fn features(&self) -> usize {
        self.x.ncols()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn design(&self) -> &Matrix {
        &self.x
    }

    pub fn responses(&self) -> &Vector {
        &self.y
    }

    fn residual(&self, w: &[f64], i: usize) -> f64 {
        let mut s = 0.0;
        for (j, wj) in w.iter().enumerate() {
            s += self.x[(i, j)] * wj;
        }
        s - self.y[i]
    }

    /// Residuals `r_i = wᵀx_i − y_i` at `z`.
    pub fn residuals(&self, z: &Vector) -> Vector {
        let w = &z.as_slice()[..self.features()];
        Vector::from_fn(self.samples(), |i, _| self.residual(w, i))
    }

    /// Objective `f(w, q)`.
    pub fn objective(&self, z: &Vector) -> f64 {
        let dw = self.features();
        let w = &z.as_slice()[..dw];
        (0..self.samples())
            .map(|i| {
                let r = self.residual(w, i);
                let q = z[dw + i];
                q * r * r - self.lambda * q * q
            })
            .sum()
    }

    /// Best response of the adversary: `q_i = r_i² / 2λ`.
    pub fn best_response(&self, w: &[f64]) -> Vector {
        Vector::from_fn(self.samples(), |i, _| {
            let r = self.residual(w, i);
            r * r / (2.0 * self.lambda)
        })
    }

    /// Operator restricted to the rows in `rows` (ascending, distinct) and
    /// rescaled by `N / |rows|`. With all rows this is the population operator.
    pub fn sampled_with_rows(&self, z: &Vector, rows: &[usize]) -> Vector {
        let scale = self.samples() as f64 / rows.len() as f64;
        self.accumulate(z, rows.iter().copied(), scale)
    }

    fn accumulate(&self, z: &Vector, rows: impl Iterator<Item = usize>, scale: f64) -> Vector {
        let dw = self.features();
        let w = &z.as_slice()[..dw];
        let mut v = Vector::zeros(z.len());
        for i in rows {
            let r = self.residual(w, i);
            let q = z[dw + i];
            let coef = 2.0 * q * r * scale;
            for j in 0..dw {
                v[j] += coef * self.x[(i, j)];
            }
            v[dw + i] = (2.0 * self.lambda * q - r * r) * scale;
        }
        v
    }
}

impl StochasticProblem for RobustRegression {
    fn dim(&self) -> usize {
        self.features() + self.samples()
    }

    fn population(&self, z: &Vector) -> Vector {
        self.accumulate(z, 0..self.samples(), 1.0)
    }

    fn sampled(&self, z: &Vector, key: &BatchKey) -> Vector {
        let b = key.batch_size().min(self.samples());
        let mut rows = index::sample(&mut key.rng(), self.samples(), b).into_vec();
        rows.sort_unstable();
        self.sampled_with_rows(z, &rows)
    }

    fn jacobian(&self, z: &Vector) -> Option<Matrix> {
        let dw = self.features();
        let n = self.samples();
        let w = &z.as_slice()[..dw];
        let mut jac = Matrix::zeros(dw + n, dw + n);
        for i in 0..n {
            let r = self.residual(w, i);
            let q = z[dw + i];
            for a in 0..dw {
                let xa = self.x[(i, a)];
                for b in 0..dw {
                    jac[(a, b)] += 2.0 * q * xa * self.x[(i, b)];
                }
                jac[(a, dw + i)] = 2.0 * r * xa;
                jac[(dw + i, a)] = -2.0 * r * xa;
            }
            jac[(dw + i, dw + i)] = 2.0 * self.lambda;
        }
        Some(jac)
    }

    fn noise_level(&self) -> Option<f64> {
        // subsampling variance depends on the point
        None
    }

    fn regularity(&self) -> RegularityMeta {
        RegularityMeta::default()
    }

    fn default_batch_size(&self) -> usize {
        self.batch
    }
}
