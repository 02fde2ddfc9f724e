use alloc::vec::Vec;

use crate::error::{SolverError, ViError};
use crate::rng::BatchKey;
use crate::vi::{eval_population, Point, StochasticProblem};
use crate::Vector;

use super::config::SolverKind;

/// One iteration: the iterate `z_t`, the direction used there and the step
/// taken from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: u64,
    /// Oracle calls spent up to and including this iteration.
    pub oracle_calls: u64,
    pub eta: f64,
    /// Momentum used by the estimator (1 for methods without one).
    pub alpha: f64,
    pub backtracks: u32,
    pub accepted: bool,
    /// `½‖V(z_t)‖²`.
    pub merit: f64,
    /// `‖V(z_t)‖`.
    pub op_norm: f64,
    /// `‖d_t − V(z_t)‖²`.
    pub est_err: f64,
    /// `merit + est_err / eta`; NaN when `eta = 0`.
    pub phi: f64,
    /// Oracle calls spent by this iteration alone.
    pub calls: u64,
}

/// Replay data for one accepted line-search step.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub t: u64,
    pub key: BatchKey,
    pub z: Point,
    pub direction: Vector,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverTrace {
    pub kind: SolverKind,
    pub records: Vec<TraceRecord>,
    pub final_point: Point,
    /// The run stopped because `‖z‖` exceeded the divergence threshold.
    pub diverged: bool,
    /// Smallest `‖z‖` over all iterates, the initial one included.
    pub min_norm: f64,
    /// Largest `‖z‖` over all iterates.
    pub max_norm: f64,
    /// Iterates `z_0, …, z_T` when path recording is on.
    pub path: Vec<Point>,
    pub certificates: Vec<Certificate>,
}

impl SolverTrace {
    pub fn oracle_calls(&self) -> u64 {
        self.records.last().map_or(0, |r| r.oracle_calls)
    }

    /// Merit of the last recorded iterate.
    pub fn final_merit(&self) -> Option<f64> {
        self.records.last().map(|r| r.merit)
    }

    pub fn final_op_norm(&self) -> Option<f64> {
        self.records.last().map(|r| r.op_norm)
    }

    /// `min ‖V(z_t)‖²` over the iterations a run with `budget` would perform.
    pub fn min_sq_op_norm_within(&self, budget: u64) -> Option<f64> {
        let mut best: Option<f64> = None;
        for r in &self.records {
            let v = r.op_norm * r.op_norm;
            best = Some(best.map_or(v, |b: f64| b.min(v)));
            if r.oracle_calls >= budget {
                break;
            }
        }
        best
    }

    pub fn accepted_steps(&self) -> usize {
        self.records.iter().filter(|r| r.accepted).count()
    }
}

/// Bookkeeping shared by all solvers.
pub(crate) struct Recorder<'a> {
    problem: &'a dyn StochasticProblem,
    kind: SolverKind,
    threshold: f64,
    keep_path: bool,
    keep_certificates: bool,
    records: Vec<TraceRecord>,
    path: Vec<Point>,
    certificates: Vec<Certificate>,
    min_norm: f64,
    max_norm: f64,
    pub calls: u64,
    pub t: u64,
}

pub(crate) struct Step<'v> {
    pub direction: &'v Vector,
    pub eta: f64,
    pub alpha: f64,
    pub backtracks: u32,
    pub accepted: bool,
    pub calls: u64,
}

impl<'a> Recorder<'a> {
    pub fn new(
        problem: &'a dyn StochasticProblem,
        kind: SolverKind,
        z0: &Point,
        threshold: f64,
        keep_path: bool,
        keep_certificates: bool,
    ) -> Self {
        let n = z0.norm();
        let mut path = Vec::new();
        if keep_path {
            path.push(z0.clone());
        }
        Self {
            problem,
            kind,
            threshold,
            keep_path,
            keep_certificates,
            records: Vec::new(),
            path,
            certificates: Vec::new(),
            min_norm: n,
            max_norm: n,
            calls: 0,
            t: 0,
        }
    }

    pub fn fail(&self, z: &Point, source: ViError) -> SolverError {
        SolverError {
            iteration: self.t as usize,
            point: z.to_vec(),
            source,
        }
    }

    /// Records iteration `t` at `z` and moves to `z_next`. Returns `true`
    /// when the run must stop because `z_next` diverged.
    pub fn push(
        &mut self,
        z: &Point,
        step: Step<'_>,
        key: Option<&BatchKey>,
        z_next: &Point,
    ) -> Result<bool, SolverError> {
        let v = eval_population(self.problem, z).map_err(|e| self.fail(z, e))?;
        let op_sq = v.norm_squared();
        let merit = 0.5 * op_sq;
        let est_err = (step.direction - &v).norm_squared();
        let phi = if step.eta > 0.0 {
            merit + est_err / step.eta
        } else {
            f64::NAN
        };
        self.calls += step.calls;
        self.records.push(TraceRecord {
            t: self.t,
            oracle_calls: self.calls,
            eta: step.eta,
            alpha: step.alpha,
            backtracks: step.backtracks,
            accepted: step.accepted,
            merit,
            op_norm: libm::sqrt(op_sq),
            est_err,
            phi,
            calls: step.calls,
        });
        if self.keep_certificates && step.accepted {
            if let Some(key) = key {
                self.certificates.push(Certificate {
                    t: self.t,
                    key: *key,
                    z: z.clone(),
                    direction: step.direction.clone(),
                    eta: step.eta,
                });
            }
        }
        self.t += 1;
        let n = z_next.norm();
        self.min_norm = self.min_norm.min(n);
        self.max_norm = self.max_norm.max(n);
        if self.keep_path {
            self.path.push(z_next.clone());
        }
        Ok(n > self.threshold)
    }

    pub fn finish(self, final_point: Point, diverged: bool) -> SolverTrace {
        SolverTrace {
            kind: self.kind,
            records: self.records,
            final_point,
            diverged,
            min_norm: self.min_norm,
            max_norm: self.max_norm,
            path: self.path,
            certificates: self.certificates,
        }
    }
}
