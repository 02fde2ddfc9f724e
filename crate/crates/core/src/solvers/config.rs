use core::fmt;
use core::str::FromStr;

use crate::error::{SolverError, ViError};
use crate::linesearch::LineSearchConfig;
use crate::vi::{Point, StochasticProblem};

/// `‖z‖` above which a run stops and is flagged as diverged.
pub const DIVERGENCE_THRESHOLD: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverKind {
    /// STORM estimator with same-batch curvature backtracking.
    VrSdaA,
    Sgda,
    /// Stochastic extragradient.
    Seg,
    Adam,
    /// Same-batch backtracking on plain stochastic samples (no variance reduction).
    SdaA,
    /// STORM estimator with a constant step (no line search).
    VrSdaFixed,
}

impl SolverKind {
    pub const ALL: [SolverKind; 6] = [
        SolverKind::Sgda,
        SolverKind::Seg,
        SolverKind::Adam,
        SolverKind::SdaA,
        SolverKind::VrSdaFixed,
        SolverKind::VrSdaA,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::VrSdaA => "vr-sda-a",
            SolverKind::Sgda => "sgda",
            SolverKind::Seg => "seg",
            SolverKind::Adam => "adam",
            SolverKind::SdaA => "sda-a",
            SolverKind::VrSdaFixed => "vr-sda-fixed",
        }
    }

    pub fn uses_line_search(&self) -> bool {
        matches!(self, SolverKind::VrSdaA | SolverKind::SdaA)
    }

    pub fn uses_fixed_step(&self) -> bool {
        !self.uses_line_search()
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = ViError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SolverKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| ViError::Contract(alloc::format!("unknown solver kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Solver selection and parameters. Fields irrelevant to `kind` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub kind: SolverKind,
    pub line_search: LineSearchConfig,
    /// Step of the fixed-step methods.
    pub fixed_eta: f64,
    /// Coupling constant of `α = c_α η²`.
    pub c_alpha: f64,
    pub adam: AdamParams,
    /// Maximum number of oracle calls.
    pub budget: u64,
    pub seed: u64,
    /// Mini-batch size; `None` uses the problem's default.
    pub batch_size: Option<usize>,
    /// Start each line search one lattice step above the previous accepted
    /// step instead of at `η_max`.
    pub warm_start: bool,
    /// Draw an independent sample for the second extragradient evaluation.
    pub seg_independent_samples: bool,
    /// Keep `(key, z, d, η)` of every accepted line-search step.
    pub record_certificates: bool,
    /// Keep every iterate.
    pub record_path: bool,
    pub divergence_threshold: f64,
}

impl SolverConfig {
    /// Defaults: `c = 1`, `β = 0.5`, `η_max = 1`, `c_α = 0.1`, fixed step 0.05.
    pub fn new(kind: SolverKind, budget: u64, seed: u64) -> Self {
        Self {
            kind,
            line_search: LineSearchConfig::default(),
            fixed_eta: 0.05,
            c_alpha: 0.1,
            adam: AdamParams::default(),
            budget,
            seed,
            batch_size: None,
            warm_start: false,
            seg_independent_samples: false,
            record_certificates: false,
            record_path: false,
            divergence_threshold: DIVERGENCE_THRESHOLD,
        }
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.fixed_eta = eta;
        self
    }

    pub fn with_line_search(mut self, ls: LineSearchConfig) -> Self {
        self.line_search = ls;
        self
    }

    pub fn with_certificates(mut self) -> Self {
        self.record_certificates = true;
        self
    }

    pub fn with_path(mut self) -> Self {
        self.record_path = true;
        self
    }

    pub fn validate(&self) -> Result<(), ViError> {
        if self.budget == 0 {
            return Err(ViError::contract("budget must be positive"));
        }
        if self.batch_size == Some(0) {
            return Err(ViError::contract("batch size must be positive"));
        }
        if !(self.divergence_threshold > 0.0) {
            return Err(ViError::contract("divergence threshold must be positive"));
        }
        match self.kind {
            SolverKind::VrSdaA | SolverKind::SdaA => {
                self.line_search.validate()?;
                if self.kind == SolverKind::VrSdaA && !(self.c_alpha > 0.0) {
                    return Err(ViError::contract("c_alpha must be positive"));
                }
            }
            SolverKind::VrSdaFixed => {
                if !(self.fixed_eta > 0.0) || !(self.c_alpha > 0.0) {
                    return Err(ViError::contract("vr-sda-fixed needs positive eta and c_alpha"));
                }
            }
            SolverKind::Sgda | SolverKind::Seg => {
                if !(self.fixed_eta >= 0.0) || !self.fixed_eta.is_finite() {
                    return Err(ViError::contract("step must be finite and non-negative"));
                }
            }
            SolverKind::Adam => {
                if !(self.fixed_eta >= 0.0) || !self.fixed_eta.is_finite() {
                    return Err(ViError::contract("step must be finite and non-negative"));
                }
                let a = self.adam;
                if !(0.0..1.0).contains(&a.beta1) || !(0.0..1.0).contains(&a.beta2) || !(a.epsilon > 0.0) {
                    return Err(ViError::contract("adam needs β1, β2 in [0, 1) and ε > 0"));
                }
            }
        }
        Ok(())
    }
}

/// Validates `cfg` against the requested solver and problem; returns the batch size.
pub(crate) fn prepare(
    problem: &dyn StochasticProblem,
    z0: &Point,
    cfg: &SolverConfig,
    kind: SolverKind,
) -> Result<usize, SolverError> {
    let wrap = |source: ViError| SolverError {
        iteration: 0,
        point: z0.to_vec(),
        source,
    };
    if cfg.kind != kind {
        return Err(wrap(ViError::Contract(alloc::format!(
            "config is for {} but {} was requested",
            cfg.kind,
            kind
        ))));
    }
    cfg.validate().map_err(wrap)?;
    if z0.dim() != problem.dim() {
        return Err(wrap(ViError::DimensionMismatch {
            expected: problem.dim(),
            got: z0.dim(),
        }));
    }
    Ok(cfg.batch_size.unwrap_or_else(|| problem.default_batch_size()))
}
