use crate::error::SolverError;
use crate::estimators::{momentum_schedule, storm_init, storm_update};
use crate::linesearch::curvature_backtrack_from;
use crate::rng::iteration_key;
use crate::vi::{eval_sampled, Point, StochasticProblem};

use super::config::{prepare, SolverConfig, SolverKind};
use super::trace::{Recorder, SolverTrace, Step};

/// Warm-start lattice index: one step above the previous accepted step.
fn start_index(cfg: &SolverConfig, prev_backtracks: Option<u32>) -> u32 {
    match (cfg.warm_start, prev_backtracks) {
        (true, Some(k)) => k.saturating_sub(1),
        _ => 0,
    }
}

/// VR-SDA-A.
///
/// Per iteration `t`: draw batch `ξ_t`; refresh the STORM direction `d_t`
/// (two calls, keeping `g_curr = V(z_t; ξ_t)`); backtrack from `η_max` on the
/// same batch; step to `z_{t+1} = z_t − η_t d_t`; set `α_{t+1} = c_α η_t²`.
/// Steps that reach the floor without passing the check are still taken and
/// are flagged `accepted = false`.
pub fn run_vr_sda_a(
    problem: &dyn StochasticProblem,
    z0: &Point,
    cfg: &SolverConfig,
) -> Result<SolverTrace, SolverError> {
    let batch = prepare(problem, z0, cfg, SolverKind::VrSdaA)?;
    let ls = cfg.line_search;
    let mut rec = Recorder::new(
        problem,
        cfg.kind,
        z0,
        cfg.divergence_threshold,
        cfg.record_path,
        cfg.record_certificates,
    );
    let alpha1 = momentum_schedule(ls.eta_max, cfg.c_alpha).map_err(|e| rec.fail(z0, e))?;
    let key0 = iteration_key(cfg.seed, 0, 0, batch);
    let mut state = storm_init(problem, z0, &key0, alpha1).map_err(|e| rec.fail(z0, e))?;
    rec.calls = state.oracle_calls();

    let mut z = z0.clone();
    let mut prev_backtracks = None;
    let mut diverged = false;
    while rec.calls < cfg.budget {
        let key = iteration_key(cfg.seed, rec.t + 1, 0, batch);
        let (next, g_curr) = storm_update(state, problem, &z, &key).map_err(|e| rec.fail(&z, e))?;
        let alpha = next.alpha();
        let direction = next.direction().clone();
        let start = start_index(cfg, prev_backtracks);
        let res = curvature_backtrack_from(problem, &z, &direction, &g_curr, &key, &ls, start)
            .map_err(|e| rec.fail(&z, e))?;
        let step = Step {
            direction: &direction,
            eta: res.eta,
            alpha,
            backtracks: res.backtracks,
            accepted: res.accepted,
            calls: 2 + res.probe_calls,
        };
        diverged = rec.push(&z, step, Some(&key), &res.z_candidate)?;
        z = res.z_candidate;
        prev_backtracks = Some(res.backtracks);
        let alpha_next = momentum_schedule(res.eta, cfg.c_alpha).map_err(|e| rec.fail(&z, e))?;
        state = next.with_alpha(alpha_next);
        if diverged {
            break;
        }
    }
    Ok(rec.finish(z, diverged))
}

/// Same-batch backtracking on the raw sample `d_t = V(z_t; ξ_t)`: VR-SDA-A
/// with `α ≡ 1`, one estimator call per iteration.
pub fn run_sda_a(problem: &dyn StochasticProblem, z0: &Point, cfg: &SolverConfig) -> Result<SolverTrace, SolverError> {
    let batch = prepare(problem, z0, cfg, SolverKind::SdaA)?;
    let ls = cfg.line_search;
    let mut rec = Recorder::new(
        problem,
        cfg.kind,
        z0,
        cfg.divergence_threshold,
        cfg.record_path,
        cfg.record_certificates,
    );
    let mut z = z0.clone();
    let mut prev_backtracks = None;
    let mut diverged = false;
    while rec.calls < cfg.budget {
        let key = iteration_key(cfg.seed, rec.t + 1, 0, batch);
        let g = eval_sampled(problem, &z, &key).map_err(|e| rec.fail(&z, e))?;
        let start = start_index(cfg, prev_backtracks);
        let res = curvature_backtrack_from(problem, &z, &g, &g, &key, &ls, start).map_err(|e| rec.fail(&z, e))?;
        let step = Step {
            direction: &g,
            eta: res.eta,
            alpha: 1.0,
            backtracks: res.backtracks,
            accepted: res.accepted,
            calls: 1 + res.probe_calls,
        };
        diverged = rec.push(&z, step, Some(&key), &res.z_candidate)?;
        z = res.z_candidate;
        prev_backtracks = Some(res.backtracks);
        if diverged {
            break;
        }
    }
    Ok(rec.finish(z, diverged))
}

/// STORM with a constant step `η` and constant momentum `clamp(c_α η²)`.
pub fn run_vr_sda_fixed(
    problem: &dyn StochasticProblem,
    z0: &Point,
    cfg: &SolverConfig,
) -> Result<SolverTrace, SolverError> {
    let batch = prepare(problem, z0, cfg, SolverKind::VrSdaFixed)?;
    let eta = cfg.fixed_eta;
    let mut rec = Recorder::new(problem, cfg.kind, z0, cfg.divergence_threshold, cfg.record_path, false);
    let alpha = momentum_schedule(eta, cfg.c_alpha).map_err(|e| rec.fail(z0, e))?;
    let key0 = iteration_key(cfg.seed, 0, 0, batch);
    let mut state = storm_init(problem, z0, &key0, alpha).map_err(|e| rec.fail(z0, e))?;
    rec.calls = state.oracle_calls();
    let mut z = z0.clone();
    let mut diverged = false;
    while rec.calls < cfg.budget {
        let key = iteration_key(cfg.seed, rec.t + 1, 0, batch);
        let (next, _) = storm_update(state, problem, &z, &key).map_err(|e| rec.fail(&z, e))?;
        let z_next = z.step(eta, next.direction()).map_err(|e| rec.fail(&z, e))?;
        let step = Step {
            direction: next.direction(),
            eta,
            alpha,
            backtracks: 0,
            accepted: true,
            calls: 2,
        };
        diverged = rec.push(&z, step, None, &z_next)?;
        z = z_next;
        state = next;
        if diverged {
            break;
        }
    }
    Ok(rec.finish(z, diverged))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linesearch::LineSearchConfig;
    use crate::problems::{make_bilinear, make_quadratic};

    fn pt(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn zero_noise_bilinear_takes_full_rotating_steps() {
        // d_t = V(z_t) = J z_t, every probe passes at η = 1, so each step is
        // z ← (I − J) z and ‖z‖² doubles.
        let p = make_bilinear(0.0).unwrap();
        let cfg = SolverConfig::new(SolverKind::VrSdaA, 60, 1).with_path();
        let tr = run_vr_sda_a(&p, &pt(&[1.0, 0.0]), &cfg).unwrap();
        for r in &tr.records {
            assert_eq!(r.eta, 1.0);
            assert_eq!(r.backtracks, 0);
            assert!(r.accepted);
            assert_eq!(r.est_err, 0.0);
        }
        for w in tr.path.windows(2) {
            let ratio = w[1].norm_squared() / w[0].norm_squared();
            assert!((ratio - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_small_c_is_flagged_not_silent() {
        let p = make_quadratic(0.5, 0.0).unwrap();
        let cfg = SolverConfig::new(SolverKind::VrSdaA, 500, 0);
        let tr = run_vr_sda_a(&p, &pt(&[1.0, 1.0]), &cfg).unwrap();
        assert!(tr.records.iter().all(|r| !r.accepted));
        assert!(!tr.diverged);
    }

    #[test]
    fn quadratic_c2_accepts_full_step_and_diverges() {
        // With c ≥ ‖A‖ every probe passes at η = 1, and I − A has spectral
        // radius √1.25.
        let p = make_quadratic(0.5, 0.0).unwrap();
        let cfg =
            SolverConfig::new(SolverKind::VrSdaA, 100_000, 0).with_line_search(LineSearchConfig::new(2.0, 0.5, 1.0));
        let tr = run_vr_sda_a(&p, &pt(&[1.0, 1.0]), &cfg).unwrap();
        assert!(tr.diverged);
        assert!(tr.records.iter().all(|r| r.accepted && r.eta == 1.0));
    }

    #[test]
    fn sda_a_matches_vr_with_unit_momentum_at_zero_noise() {
        let p = make_quadratic(0.5, 0.0).unwrap();
        let ls = LineSearchConfig::new(2.0, 0.5, 0.5);
        let sda = SolverConfig::new(SolverKind::SdaA, 300, 3)
            .with_line_search(ls)
            .with_path();
        let mut vr = SolverConfig::new(SolverKind::VrSdaA, 600, 3)
            .with_line_search(ls)
            .with_path();
        vr.c_alpha = 1e6;
        let a = run_sda_a(&p, &pt(&[1.0, -2.0]), &sda).unwrap();
        let b = run_vr_sda_a(&p, &pt(&[1.0, -2.0]), &vr).unwrap();
        let n = a.path.len().min(b.path.len());
        assert!(n > 50);
        assert_eq!(&a.path[..n], &b.path[..n]);
    }

    #[test]
    fn fixed_variant_uses_constant_momentum() {
        let p = make_bilinear(2.25).unwrap();
        let cfg = SolverConfig::new(SolverKind::VrSdaFixed, 1000, 9);
        let tr = run_vr_sda_fixed(&p, &pt(&[1.0, 1.0]), &cfg).unwrap();
        for r in &tr.records {
            assert!((r.alpha - 2.5e-4).abs() < 1e-18);
            assert_eq!(r.calls, 2);
        }
    }

    #[test]
    fn fixed_variant_zero_noise_energy_law() {
        let p = make_bilinear(0.0).unwrap();
        let cfg = SolverConfig::new(SolverKind::VrSdaFixed, 400, 9).with_path();
        let tr = run_vr_sda_fixed(&p, &pt(&[0.6, -0.8]), &cfg).unwrap();
        for w in tr.path.windows(2) {
            let ratio = w[1].norm_squared() / w[0].norm_squared();
            assert!((ratio - 1.0025).abs() < 1e-12);
        }
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let p = make_bilinear(0.0).unwrap();
        let cfg = SolverConfig::new(SolverKind::Sgda, 10, 0);
        assert!(run_vr_sda_a(&p, &pt(&[1.0, 0.0]), &cfg).is_err());
        let cfg = SolverConfig::new(SolverKind::VrSdaA, 10, 0);
        assert!(run_vr_sda_a(&p, &pt(&[1.0, 0.0, 2.0]), &cfg).is_err());
    }

    #[test]
    fn degenerate_zero_sample_is_a_no_op() {
        let p = make_bilinear(0.0).unwrap();
        let cfg = SolverConfig::new(SolverKind::SdaA, 5, 0);
        let tr = run_sda_a(&p, &pt(&[0.0, 0.0]), &cfg).unwrap();
        assert!(tr.records.iter().all(|r| r.calls == 1 && r.eta == 1.0));
        assert_eq!(tr.final_point.as_slice(), &[0.0, 0.0]);
    }
}
