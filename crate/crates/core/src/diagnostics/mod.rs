//! Empirical certification of regularity constants, the merit smoothness and
//! variance recursion bounds, the convergence rate and the Lyapunov potential.

mod constants;
mod lyapunov;
mod rate;
mod smoothness;
mod variance;

pub use constants::{
    estimate_dissipativity, estimate_jacobian_lipschitz, estimate_lipschitz, spectral_norm, Region, DEFAULT_RADIUS,
};
pub use lyapunov::{lyapunov_series, moving_average, replay_certificates, ReplayReport};
pub use rate::{fit_rate, rate_values, RateFit};
pub use smoothness::{check_merit_smoothness, SmoothnessReport};
pub use variance::{check_variance_recursion, VarianceCell, VarianceReport};
