//! Solvers and diagnostics for stochastic variational inequalities.
//!
//! The crate finds zeros of a vector field `V(z) = E[V(z; ξ)]` given only a
//! sampling oracle. It ships:
//!
//! * [`vi`]: the operator abstraction, the merit function `½‖V‖²` and
//!   finite-difference Jacobians,
//! * [`problems`]: bilinear, dissipative quadratic and robust-regression games,
//! * [`estimators`]: the STORM recursive-momentum estimator,
//! * [`linesearch`]: same-batch curvature backtracking,
//! * [`solvers`]: VR-SDA-A together with its ablations and the SGDA, SEG and
//!   Adam baselines,
//! * [`diagnostics`]: empirical regularity constants, smoothness and variance
//!   recursion certificates, rate fitting and the Lyapunov potential.
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is enabled.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod linesearch;
pub mod problems;
pub mod rng;
pub mod solvers;
pub mod vi;

pub use error::{SolverError, ViError};
pub use rng::{derive_seed, BatchKey};
pub use vi::{Point, RegularityMeta, StochasticProblem};

/// Dense column vector used for operator values and directions.
pub type Vector = nalgebra::DVector<f64>;
/// Dense matrix used for Jacobians.
pub type Matrix = nalgebra::DMatrix<f64>;
