use alloc::vec::Vec;

use crate::error::ViError;
use crate::linesearch::replay_certificate;
use crate::solvers::SolverTrace;
use crate::vi::StochasticProblem;

/// `Φ_t = M(z_t) + ‖d_t − V(z_t)‖² / η_t` per iteration; `None` where `η_t = 0`.
pub fn lyapunov_series(trace: &SolverTrace) -> Vec<Option<f64>> {
    trace
        .records
        .iter()
        .map(|r| (r.eta > 0.0).then(|| r.merit + r.est_err / r.eta))
        .collect()
}

/// Trailing moving average with the given window (shorter at the start).
/// Gaps are skipped.
pub fn moving_average(series: &[Option<f64>], window: usize) -> Vec<f64> {
    let window = window.max(1);
    (0..series.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(window);
            let vals: Vec<f64> = series[lo..=i].iter().flatten().copied().collect();
            if vals.is_empty() {
                f64::NAN
            } else {
                vals.iter().sum::<f64>() / vals.len() as f64
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReplayReport {
    pub replayed: usize,
    pub reproduced: usize,
}

impl ReplayReport {
    pub fn all_reproduced(&self) -> bool {
        self.replayed == self.reproduced
    }

    pub fn merge(self, other: ReplayReport) -> ReplayReport {
        ReplayReport {
            replayed: self.replayed + other.replayed,
            reproduced: self.reproduced + other.reproduced,
        }
    }
}

/// Re-evaluates the curvature condition of every recorded certificate with
/// its batch key and constant `c`.
pub fn replay_certificates(
    problem: &dyn StochasticProblem,
    trace: &SolverTrace,
    c: f64,
) -> Result<ReplayReport, ViError> {
    let mut report = ReplayReport::default();
    for cert in &trace.certificates {
        report.replayed += 1;
        if replay_certificate(problem, &cert.z, &cert.direction, cert.eta, &cert.key, c)? {
            report.reproduced += 1;
        }
    }
    Ok(report)
}
