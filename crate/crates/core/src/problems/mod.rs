//! Benchmark instances: rotational and dissipative linear games and the
//! adversarially reweighted robust-regression game.

mod linear;
mod regression;

pub use linear::{make_bilinear, make_quadratic, LinearGame};
pub use regression::{
    generate_regression_data, make_robust_regression, RegressionData, RobustRegression, DEFAULT_BATCH, DEFAULT_LAMBDA,
    DEFAULT_OUTLIER_SD, INLIER_NOISE_SD,
};
