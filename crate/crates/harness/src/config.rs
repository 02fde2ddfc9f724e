//! Experiment config files.
//!
//! The format is line-oriented:
//!
//! ```text
//! # comment (a '#' anywhere starts a comment)
//! [experiment]
//! name = bilinear
//! runs = 5
//! master_seed = 2024
//! budgets = 5000, 10000
//! output_dir = out/bilinear
//! emit_plots = true
//!
//! [problem]
//! kind = bilinear
//! sigma2 = 2.25
//! z0 = 1.0, 1.0
//!
//! [solver]
//! kind = sgda
//! eta = 0.1
//!
//! [solver]
//! kind = vr-sda-a
//! c = 1.0
//! ```
//!
//! `[experiment]` and `[problem]` appear once, `[solver]` any number of
//! times (at least once). Keys may not repeat within a section. Lists are
//! comma-separated. See `README.md` for every key.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use vrsda_core::linesearch::LineSearchConfig;
use vrsda_core::problems::{DEFAULT_BATCH, DEFAULT_LAMBDA, DEFAULT_OUTLIER_SD};
use vrsda_core::solvers::{SolverConfig, SolverKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }

    fn global(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Bilinear {
        sigma2: f64,
    },
    Quadratic {
        mu: f64,
        sigma2: f64,
    },
    RobustRegression {
        samples: usize,
        features: usize,
        outlier_fraction: f64,
        outlier_sd: f64,
        data_seed: u64,
        lambda: f64,
        batch: usize,
        /// Load `x_1..x_D,y` rows from this file instead of generating.
        data: Option<PathBuf>,
    },
}

impl ProblemSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemSpec::Bilinear { .. } => "bilinear",
            ProblemSpec::Quadratic { .. } => "quadratic",
            ProblemSpec::RobustRegression { .. } => "robust-regression",
        }
    }
}

/// One `[solver]` section. `config.budget` and `config.seed` are filled in
/// per run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSpec {
    pub label: String,
    pub config: SolverConfig,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub runs: u64,
    pub master_seed: u64,
    pub budgets: Vec<u64>,
    pub output_dir: PathBuf,
    pub emit_plots: bool,
    pub problem: ProblemSpec,
    /// Initial point; `None` means the problem default.
    pub z0: Option<Vec<f64>>,
    pub solvers: Vec<SolverSpec>,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::global(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let sections = split_sections(text)?;
        let mut experiment = None;
        let mut problem = None;
        let mut solvers = Vec::new();
        for s in sections {
            match s.name.as_str() {
                "experiment" if experiment.is_some() => {
                    return Err(ConfigError::at(s.line, "duplicate [experiment] section"))
                }
                "problem" if problem.is_some() => return Err(ConfigError::at(s.line, "duplicate [problem] section")),
                "experiment" => experiment = Some(s),
                "problem" => problem = Some(s),
                "solver" => solvers.push(s),
                other => return Err(ConfigError::at(s.line, format!("unknown section [{other}]"))),
            }
        }
        let mut experiment = experiment.ok_or_else(|| ConfigError::global("missing [experiment] section"))?;
        let mut problem_sec = problem.ok_or_else(|| ConfigError::global("missing [problem] section"))?;

        let name = experiment.take_str("name")?.unwrap_or_else(|| "experiment".to_string());
        let runs = experiment.take("runs", parse_u64)?.unwrap_or(1);
        if runs == 0 {
            return Err(experiment.error_at("runs", "runs must be at least 1"));
        }
        let master_seed = experiment.take("master_seed", parse_u64)?.unwrap_or(0);
        let budgets = experiment
            .take("budgets", |v| parse_list(v, parse_u64))?
            .ok_or_else(|| ConfigError::at(experiment.line, "missing key `budgets`"))?;
        if budgets.is_empty() || budgets.contains(&0) {
            return Err(experiment.error_at("budgets", "budgets must be positive"));
        }
        let output_dir = PathBuf::from(
            experiment
                .take_str("output_dir")?
                .unwrap_or_else(|| format!("out/{name}")),
        );
        let emit_plots = experiment.take("emit_plots", parse_bool)?.unwrap_or(false);
        experiment.finish()?;

        let (problem, z0) = parse_problem(&mut problem_sec)?;
        problem_sec.finish()?;

        if solvers.is_empty() {
            return Err(ConfigError::global("no [solver] sections: the solver list is empty"));
        }
        let mut specs: Vec<SolverSpec> = Vec::new();
        for mut s in solvers {
            let spec = parse_solver(&mut s)?;
            s.finish()?;
            if specs.iter().any(|o| o.label == spec.label) {
                return Err(ConfigError::at(
                    spec.line,
                    format!("duplicate solver label `{}`", spec.label),
                ));
            }
            specs.push(spec);
        }
        Ok(Self {
            name,
            runs,
            master_seed,
            budgets,
            output_dir,
            emit_plots,
            problem,
            z0,
            solvers: specs,
        })
    }
}

struct Entry {
    value: String,
    line: usize,
}

struct Section {
    name: String,
    line: usize,
    entries: HashMap<String, Entry>,
}

impl Section {
    fn take<T>(&mut self, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<Option<T>, ConfigError> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some(e) => parse(&e.value)
                .map(Some)
                .map_err(|m| ConfigError::at(e.line, format!("`{key}`: {m}"))),
        }
    }

    fn take_str(&mut self, key: &str) -> Result<Option<String>, ConfigError> {
        self.take(key, |v| {
            if v.is_empty() {
                Err("empty value".to_string())
            } else {
                Ok(v.to_string())
            }
        })
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map_or(self.line, |e| e.line)
    }

    fn error_at(&self, key: &str, message: &str) -> ConfigError {
        ConfigError::at(self.line_of(key), message)
    }

    fn finish(self) -> Result<(), ConfigError> {
        let mut left: Vec<_> = self.entries.into_iter().collect();
        left.sort_by_key(|(_, e)| e.line);
        match left.first() {
            Some((k, e)) => Err(ConfigError::at(e.line, format!("unknown key `{k}` in [{}]", self.name))),
            None => Ok(()),
        }
    }
}

fn split_sections(text: &str) -> Result<Vec<Section>, ConfigError> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::at(line, "unterminated section header"))?
                .trim();
            if name.is_empty() {
                return Err(ConfigError::at(line, "empty section name"));
            }
            sections.push(Section {
                name: name.to_string(),
                line,
                entries: HashMap::new(),
            });
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line, format!("expected `key = value`, found `{content}`")))?;
        let key = key.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(ConfigError::at(line, format!("invalid key `{key}`")));
        }
        let section = sections
            .last_mut()
            .ok_or_else(|| ConfigError::at(line, "key outside of any section"))?;
        if section.entries.contains_key(key) {
            return Err(ConfigError::at(line, format!("duplicate key `{key}`")));
        }
        section.entries.insert(
            key.to_string(),
            Entry {
                value: value.trim().to_string(),
                line,
            },
        );
    }
    Ok(sections)
}

fn parse_u64(v: &str) -> Result<u64, String> {
    let cleaned: String = v.chars().filter(|c| *c != '_').collect();
    if let Ok(n) = cleaned.parse::<u64>() {
        return Ok(n);
    }
    // Accept integral scientific notation such as 2e5.
    match cleaned.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 1.8e19 => Ok(x as u64),
        _ => Err(format!("expected a non-negative integer, found `{v}`")),
    }
}

fn parse_usize(v: &str) -> Result<usize, String> {
    parse_u64(v).and_then(|n| usize::try_from(n).map_err(|e| e.to_string()))
}

fn parse_f64(v: &str) -> Result<f64, String> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("expected a finite number, found `{v}`")),
    }
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, found `{v}`")),
    }
}

fn parse_list<T>(v: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    v.split(',').map(|s| item(s.trim())).collect()
}

fn parse_problem(s: &mut Section) -> Result<(ProblemSpec, Option<Vec<f64>>), ConfigError> {
    let kind_line = s.line_of("kind");
    let kind = s
        .take_str("kind")?
        .ok_or_else(|| ConfigError::at(s.line, "missing key `kind`"))?;
    let z0 = s.take("z0", |v| parse_list(v, parse_f64))?;
    let problem = match kind.as_str() {
        "bilinear" => ProblemSpec::Bilinear {
            sigma2: non_negative(s, "sigma2", 0.0)?,
        },
        "quadratic" => {
            let mu_line = s.line_of("mu");
            let mu = s.take("mu", parse_f64)?.unwrap_or(0.5);
            if mu.is_nan() || mu <= 0.0 {
                return Err(ConfigError::at(mu_line, "`mu` must be positive"));
            }
            ProblemSpec::Quadratic {
                mu,
                sigma2: non_negative(s, "sigma2", 0.0)?,
            }
        }
        "robust-regression" => {
            let samples = s.take("samples", parse_usize)?.unwrap_or(200);
            let features = s.take("features", parse_usize)?.unwrap_or(20);
            let outlier_fraction = s.take("outlier_fraction", parse_f64)?.unwrap_or(0.1);
            let outlier_sd = s.take("outlier_sd", parse_f64)?.unwrap_or(DEFAULT_OUTLIER_SD);
            let data_seed = s.take("data_seed", parse_u64)?.unwrap_or(42);
            let lambda_line = s.line_of("lambda");
            let lambda = s.take("lambda", parse_f64)?.unwrap_or(DEFAULT_LAMBDA);
            if lambda.is_nan() || lambda <= 0.0 {
                return Err(ConfigError::at(lambda_line, "`lambda` must be positive"));
            }
            let batch_line = s.line_of("batch");
            let batch = s.take("batch", parse_usize)?.unwrap_or(DEFAULT_BATCH);
            if batch == 0 {
                return Err(ConfigError::at(batch_line, "`batch` must be positive"));
            }
            let data = s.take_str("data")?.map(PathBuf::from);
            if data.is_none() && (samples == 0 || features == 0 || !(0.0..1.0).contains(&outlier_fraction)) {
                return Err(ConfigError::at(s.line, "invalid dataset shape or outlier fraction"));
            }
            ProblemSpec::RobustRegression {
                samples,
                features,
                outlier_fraction,
                outlier_sd,
                data_seed,
                lambda,
                batch,
                data,
            }
        }
        other => return Err(ConfigError::at(kind_line, format!("unknown problem kind `{other}`"))),
    };
    Ok((problem, z0))
}

fn non_negative(s: &mut Section, key: &str, default: f64) -> Result<f64, ConfigError> {
    let line = s.line_of(key);
    let v = s.take(key, parse_f64)?.unwrap_or(default);
    if v < 0.0 {
        return Err(ConfigError::at(line, format!("`{key}` must be non-negative")));
    }
    Ok(v)
}

fn parse_solver(s: &mut Section) -> Result<SolverSpec, ConfigError> {
    let line = s.line;
    let kind_line = s.line_of("kind");
    let kind: SolverKind = s
        .take_str("kind")?
        .ok_or_else(|| ConfigError::at(line, "missing key `kind` in [solver]"))?
        .parse()
        .map_err(|e| ConfigError::at(kind_line, format!("{e}")))?;
    let label = s.take_str("label")?.unwrap_or_else(|| kind.name().to_string());
    if !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
        return Err(ConfigError::at(
            line,
            format!("label `{label}` may only use [A-Za-z0-9_-]"),
        ));
    }
    let mut cfg = SolverConfig::new(kind, 1, 0);
    let defaults = LineSearchConfig::default();
    let c = s.take("c", parse_f64)?.unwrap_or(defaults.c);
    let beta = s.take("beta", parse_f64)?.unwrap_or(defaults.beta);
    let eta_max = s.take("eta_max", parse_f64)?.unwrap_or(defaults.eta_max);
    let mut ls = LineSearchConfig::new(c, beta, eta_max);
    if let Some(k) = s.take("max_backtracks", |v| {
        parse_u64(v).and_then(|n| u32::try_from(n).map_err(|e| e.to_string()))
    })? {
        ls.max_backtracks = k;
        ls.eta_floor = ls.step_at(k);
    }
    cfg.line_search = ls;
    if let Some(eta) = s.take("eta", parse_f64)? {
        cfg.fixed_eta = eta;
    }
    if let Some(v) = s.take("c_alpha", parse_f64)? {
        cfg.c_alpha = v;
    }
    if let Some(v) = s.take("beta1", parse_f64)? {
        cfg.adam.beta1 = v;
    }
    if let Some(v) = s.take("beta2", parse_f64)? {
        cfg.adam.beta2 = v;
    }
    if let Some(v) = s.take("epsilon", parse_f64)? {
        cfg.adam.epsilon = v;
    }
    cfg.batch_size = s.take("batch", parse_usize)?;
    if let Some(v) = s.take("warm_start", parse_bool)? {
        cfg.warm_start = v;
    }
    if let Some(v) = s.take("independent_samples", parse_bool)? {
        cfg.seg_independent_samples = v;
    }
    if let Some(v) = s.take("divergence_threshold", parse_f64)? {
        cfg.divergence_threshold = v;
    }
    cfg.validate()
        .map_err(|e| ConfigError::at(line, format!("invalid [solver] `{label}`: {e}")))?;
    Ok(SolverSpec {
        label,
        config: cfg,
        line,
    })
}
