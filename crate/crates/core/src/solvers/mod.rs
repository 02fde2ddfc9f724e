//! VR-SDA-A, its ablations and the fixed-step baselines.
//!
//! Every solver consumes an oracle budget (sampled-operator evaluations, line
//! search probes included) and emits a [`SolverTrace`] whose rows share one
//! schema, so runs of different methods compare at equal cost. Population
//! quantities in the trace are diagnostics and are not charged to the budget.

mod adaptive;
mod baselines;
mod config;
mod trace;

pub use adaptive::{run_sda_a, run_vr_sda_a, run_vr_sda_fixed};
pub use baselines::{run_adam, run_seg, run_sgda};
pub use config::{AdamParams, SolverConfig, SolverKind, DIVERGENCE_THRESHOLD};
pub use trace::{Certificate, SolverTrace, TraceRecord};

use crate::error::SolverError;
use crate::vi::{Point, StochasticProblem};

/// Runs the solver selected by `cfg.kind`.
pub fn run(problem: &dyn StochasticProblem, z0: &Point, cfg: &SolverConfig) -> Result<SolverTrace, SolverError> {
    match cfg.kind {
        SolverKind::VrSdaA => run_vr_sda_a(problem, z0, cfg),
        SolverKind::Sgda => run_sgda(problem, z0, cfg),
        SolverKind::Seg => run_seg(problem, z0, cfg),
        SolverKind::Adam => run_adam(problem, z0, cfg),
        SolverKind::SdaA => run_sda_a(problem, z0, cfg),
        SolverKind::VrSdaFixed => run_vr_sda_fixed(problem, z0, cfg),
    }
}
