use crate::error::SolverError;
use crate::rng::iteration_key;
use crate::vi::{eval_sampled, Point, StochasticProblem};
use crate::Vector;

use super::config::{prepare, SolverConfig, SolverKind};
use super::trace::{Recorder, SolverTrace, Step};

/// Simultaneous stochastic descent-ascent, `z ← z − η V(z; ξ_t)`.
pub fn run_sgda(problem: &dyn StochasticProblem, z0: &Point, cfg: &SolverConfig) -> Result<SolverTrace, SolverError> {
    let batch = prepare(problem, z0, cfg, SolverKind::Sgda)?;
    let eta = cfg.fixed_eta;
    let mut rec = Recorder::new(problem, cfg.kind, z0, cfg.divergence_threshold, cfg.record_path, false);
    let mut z = z0.clone();
    let mut diverged = false;
    while rec.calls < cfg.budget {
        let key = iteration_key(cfg.seed, rec.t + 1, 0, batch);
        let g = eval_sampled(problem, &z, &key).map_err(|e| rec.fail(&z, e))?;
        let z_next = z.step(eta, &g).map_err(|e| rec.fail(&z, e))?;
        let step = Step {
            direction: &g,
            eta,
            alpha: 1.0,
            backtracks: 0,
            accepted: true,
            calls: 1,
        };
        diverged = rec.push(&z, step, None, &z_next)?;
        z = z_next;
        if diverged {
            break;
        }
    }
    Ok(rec.finish(z, diverged))
}

/// Stochastic extragradient:
/// `z_½ = z − η V(z; ξ_t)`, `z ← z − η V(z_½; ξ_t)`.
///
/// Both evaluations share `ξ_t` unless `seg_independent_samples` is set.
pub fn run_seg(problem: &dyn StochasticProblem, z0: &Point, cfg: &SolverConfig) -> Result<SolverTrace, SolverError> {
    let batch = prepare(problem, z0, cfg, SolverKind::Seg)?;
    let eta = cfg.fixed_eta;
    let mut rec = Recorder::new(problem, cfg.kind, z0, cfg.divergence_threshold, cfg.record_path, false);
    let mut z = z0.clone();
    let mut diverged = false;
    while rec.calls < cfg.budget {
        let key = iteration_key(cfg.seed, rec.t + 1, 0, batch);
        let second = if cfg.seg_independent_samples {
            iteration_key(cfg.seed, rec.t + 1, 1, batch)
        } else {
            key
        };
        let g = eval_sampled(problem, &z, &key).map_err(|e| rec.fail(&z, e))?;
        let half = z.step(eta, &g).map_err(|e| rec.fail(&z, e))?;
        let g_half = eval_sampled(problem, &half, &second).map_err(|e| rec.fail(&half, e))?;
        let z_next = z.step(eta, &g_half).map_err(|e| rec.fail(&z, e))?;
        let step = Step {
            direction: &g,
            eta,
            alpha: 1.0,
            backtracks: 0,
            accepted: true,
            calls: 2,
        };
        diverged = rec.push(&z, step, None, &z_next)?;
        z = z_next;
        if diverged {
            break;
        }
    }
    Ok(rec.finish(z, diverged))
}

/// Adam on the joint operator (one moment state over all of `z`), with bias
/// correction.
pub fn run_adam(problem: &dyn StochasticProblem, z0: &Point, cfg: &SolverConfig) -> Result<SolverTrace, SolverError> {
    let batch = prepare(problem, z0, cfg, SolverKind::Adam)?;
    let eta = cfg.fixed_eta;
    let p = cfg.adam;
    let mut rec = Recorder::new(problem, cfg.kind, z0, cfg.divergence_threshold, cfg.record_path, false);
    let d = problem.dim();
    let mut m = Vector::zeros(d);
    let mut v = Vector::zeros(d);
    let mut z = z0.clone();
    let mut diverged = false;
    let mut b1_pow = 1.0;
    let mut b2_pow = 1.0;
    while rec.calls < cfg.budget {
        let key = iteration_key(cfg.seed, rec.t + 1, 0, batch);
        let g = eval_sampled(problem, &z, &key).map_err(|e| rec.fail(&z, e))?;
        b1_pow *= p.beta1;
        b2_pow *= p.beta2;
        m = m * p.beta1 + &g * (1.0 - p.beta1);
        v = v * p.beta2 + g.component_mul(&g) * (1.0 - p.beta2);
        let update = Vector::from_fn(d, |i, _| {
            let m_hat = m[i] / (1.0 - b1_pow);
            let v_hat = v[i] / (1.0 - b2_pow);
            m_hat / (libm::sqrt(v_hat) + p.epsilon)
        });
        let z_next = z.step(eta, &update).map_err(|e| rec.fail(&z, e))?;
        let step = Step {
            direction: &g,
            eta,
            alpha: 1.0,
            backtracks: 0,
            accepted: true,
            calls: 1,
        };
        diverged = rec.push(&z, step, None, &z_next)?;
        z = z_next;
        if diverged {
            break;
        }
    }
    Ok(rec.finish(z, diverged))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::make_bilinear;
    use crate::vi::RegularityMeta;

    fn pt(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn sgda_energy_law() {
        let p = make_bilinear(0.0).unwrap();
        let cfg = SolverConfig::new(SolverKind::Sgda, 200, 0).with_eta(0.1).with_path();
        let tr = run_sgda(&p, &pt(&[1.0, 0.0]), &cfg).unwrap();
        for (t, z) in tr.path.iter().enumerate() {
            let expected = libm::pow(1.01, t as f64);
            assert!((z.norm_squared() - expected).abs() <= 1e-12 * expected);
        }
    }

    #[test]
    fn zero_step_freezes_every_baseline() {
        let p = make_bilinear(2.25).unwrap();
        let z0 = pt(&[0.5, -0.5]);
        for kind in [SolverKind::Sgda, SolverKind::Seg, SolverKind::Adam] {
            let cfg = SolverConfig::new(kind, 50, 0).with_eta(0.0);
            let tr = super::super::run(&p, &z0, &cfg).unwrap();
            assert_eq!(tr.final_point, z0, "{kind}");
            let m0 = tr.records[0].merit;
            assert!(tr.records.iter().all(|r| r.merit == m0 && r.phi.is_nan()));
        }
    }

    #[test]
    fn seg_contracts_and_is_marginal_at_unit_step() {
        let p = make_bilinear(0.0).unwrap();
        let cfg = SolverConfig::new(SolverKind::Seg, 100, 0).with_eta(0.5).with_path();
        let tr = run_seg(&p, &pt(&[1.0, 0.0]), &cfg).unwrap();
        for w in tr.path.windows(2) {
            let ratio = w[1].norm_squared() / w[0].norm_squared();
            assert!((ratio - 0.8125).abs() < 1e-12);
        }
        let cfg = SolverConfig::new(SolverKind::Seg, 100, 0).with_eta(1.0).with_path();
        let tr = run_seg(&p, &pt(&[1.0, 0.0]), &cfg).unwrap();
        for z in &tr.path {
            assert!((z.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn adam_on_constant_field_moves_eta_per_coordinate() {
        // V(z) = c for every z: an affine problem with zero linear part.
        struct Constant;
        impl StochasticProblem for Constant {
            fn dim(&self) -> usize {
                2
            }
            fn population(&self, _z: &Vector) -> Vector {
                Vector::from_vec(alloc::vec![3.0, -0.5])
            }
            fn sampled(&self, z: &Vector, _key: &crate::BatchKey) -> Vector {
                self.population(z)
            }
            fn noise_level(&self) -> Option<f64> {
                Some(0.0)
            }
            fn regularity(&self) -> RegularityMeta {
                RegularityMeta::default()
            }
        }
        let cfg = SolverConfig::new(SolverKind::Adam, 2000, 0).with_eta(0.01).with_path();
        let tr = run_adam(&Constant, &pt(&[0.0, 0.0]), &cfg).unwrap();
        let n = tr.path.len();
        let last = tr.path[n - 1].as_vector() - tr.path[n - 2].as_vector();
        assert!((last[0] + 0.01).abs() < 1e-9);
        assert!((last[1] - 0.01).abs() < 1e-9);
    }

    #[test]
    fn sgda_flags_divergence() {
        let p = make_bilinear(2.25).unwrap();
        let cfg = SolverConfig::new(SolverKind::Sgda, 10_000, 4).with_eta(0.1);
        let tr = run_sgda(&p, &pt(&[1.0, 1.0]), &cfg).unwrap();
        assert!(tr.diverged);
        assert!(tr.final_point.norm() > 1e8);
    }
}
