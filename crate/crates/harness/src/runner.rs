//! Executes an experiment config: every solver × run × budget, one trace
//! CSV per run, an iterate path for two-dimensional problems, and
//! `summary.csv`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use thiserror::Error;
use vrsda_core::problems::{generate_regression_data, make_bilinear, make_quadratic, RobustRegression};
use vrsda_core::solvers::{run, SolverKind, SolverTrace};
use vrsda_core::{derive_seed, Matrix, Point, StochasticProblem, Vector, ViError};

use crate::config::{ConfigError, ExperimentConfig, ProblemSpec};
use crate::dataset::{parse_dataset, render_dataset, DatasetError};
use crate::fmt_float;
use crate::plot::{convergence_svg, trajectory_svg, PlotError, Series};
use crate::trace_csv::{render_path, render_trace};

pub const SUMMARY_HEADER: &str = "label,kind,run,seed,budget,iterations,oracle_calls,accepted_steps,final_op_norm,final_merit,min_norm,max_norm,diverged,failed,wall_time_s,trace_file,error";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid problem: {0}")]
    Problem(ViError),
    #[error("dataset {path}: {source}")]
    Dataset {
        path: PathBuf,
        #[source]
        source: DatasetError,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Plot(#[from] PlotError),
}

impl RunError {
    /// 2 for anything wrong with the inputs, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Io { .. } | RunError::Plot(_) => 1,
            _ => 2,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Replaces the config's `output_dir`.
    pub output_dir: Option<PathBuf>,
    /// Replaces the regression dataset (`x1..xD,y` rows).
    pub data: Option<PathBuf>,
    /// Writes the regression dataset before running.
    pub export_data: Option<PathBuf>,
    /// Worker threads; `None` uses the available parallelism.
    pub threads: Option<usize>,
}

/// A problem instance built from a config.
pub struct Instance {
    pub problem: Box<dyn StochasticProblem>,
    pub z0: Point,
    /// Design and responses of a regression problem.
    pub data: Option<(Matrix, Vector)>,
}

pub fn build_instance(cfg: &ExperimentConfig, data_override: Option<&Path>) -> Result<Instance, RunError> {
    let (problem, data): (Box<dyn StochasticProblem>, _) = match &cfg.problem {
        ProblemSpec::Bilinear { sigma2 } => (Box::new(make_bilinear(*sigma2).map_err(RunError::Problem)?), None),
        ProblemSpec::Quadratic { mu, sigma2 } => {
            (Box::new(make_quadratic(*mu, *sigma2).map_err(RunError::Problem)?), None)
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
        } => {
            let (x, y) = match data_override.or(data.as_deref()) {
                Some(path) => {
                    let text = fs::read_to_string(path).map_err(io_err(path))?;
                    parse_dataset(&text).map_err(|source| RunError::Dataset {
                        path: path.to_path_buf(),
                        source,
                    })?
                }
                None => {
                    let d = generate_regression_data(*samples, *features, *outlier_fraction, *outlier_sd, *data_seed)
                        .map_err(RunError::Problem)?;
                    (d.x, d.y)
                }
            };
            let batch = (*batch).min(y.len());
            let p = RobustRegression::new(x.clone(), y.clone(), *lambda, batch).map_err(RunError::Problem)?;
            (Box::new(p), Some((x, y)))
        }
    };
    let d = problem.dim();
    let z0 = match (&cfg.z0, &cfg.problem) {
        (Some(v), _) => {
            if v.len() != d {
                return Err(RunError::Usage(format!(
                    "z0 has {} coordinates, the problem has {d}",
                    v.len()
                )));
            }
            Point::new(v.clone()).map_err(RunError::Problem)?
        }
        (None, ProblemSpec::RobustRegression { .. }) => Point::zeros(d),
        (None, _) => Point::new(vec![1.0; d]).map_err(RunError::Problem)?,
    };
    Ok(Instance { problem, z0, data })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub iterations: usize,
    pub oracle_calls: u64,
    pub accepted_steps: usize,
    pub final_op_norm: f64,
    pub final_merit: f64,
    pub min_norm: f64,
    pub max_norm: f64,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub label: String,
    pub kind: SolverKind,
    pub run: u64,
    pub seed: u64,
    pub budget: u64,
    /// `Err` holds the message of a run that failed numerically.
    pub outcome: Result<RunOutcome, String>,
    pub wall_time_s: f64,
    pub trace_file: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub output_dir: PathBuf,
    pub rows: Vec<SummaryRow>,
}

impl RunReport {
    pub fn failed(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_err()).count()
    }
}

pub fn trace_file_name(label: &str, run: u64, budget: u64) -> String {
    format!("{label}_run{run}_b{budget}.csv")
}

struct Job {
    solver: usize,
    run: u64,
    budget: u64,
}

/// Validates, then runs the full matrix and writes every output file.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport, RunError> {
    let instance = build_instance(cfg, opts.data.as_deref())?;
    if let Some(path) = &opts.export_data {
        let (x, y) = instance
            .data
            .as_ref()
            .ok_or_else(|| RunError::Usage("--export-data needs a robust-regression problem".into()))?;
        fs::write(path, render_dataset(x, y)).map_err(io_err(path))?;
    }
    let out_dir = opts.output_dir.clone().unwrap_or_else(|| cfg.output_dir.clone());
    fs::create_dir_all(&out_dir).map_err(io_err(&out_dir))?;

    let mut jobs = Vec::new();
    for (solver, _) in cfg.solvers.iter().enumerate() {
        for run in 0..cfg.runs {
            for &budget in &cfg.budgets {
                jobs.push(Job { solver, run, budget });
            }
        }
    }
    let keep_path = instance.problem.dim() == 2;
    let threads = opts
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .clamp(1, jobs.len().max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<SummaryRow, RunError>>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(i) else { break };
                let row = execute(cfg, &instance, job, keep_path, &out_dir);
                results.lock().expect("result slots poisoned")[i] = Some(row);
            });
        }
    });
    let rows = results
        .into_inner()
        .expect("result slots poisoned")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect::<Result<Vec<_>, _>>()?;

    let summary = out_dir.join("summary.csv");
    fs::write(&summary, render_summary(&rows)).map_err(io_err(&summary))?;
    if cfg.emit_plots {
        write_plots(cfg, &instance, &out_dir)?;
    }
    Ok(RunReport {
        output_dir: out_dir,
        rows,
    })
}

fn execute(
    cfg: &ExperimentConfig,
    inst: &Instance,
    job: &Job,
    keep_path: bool,
    out_dir: &Path,
) -> Result<SummaryRow, RunError> {
    let spec = &cfg.solvers[job.solver];
    let seed = derive_seed(cfg.master_seed, job.run);
    let mut sc = spec.config.clone();
    sc.budget = job.budget;
    sc.seed = seed;
    sc.record_path = keep_path;
    let start = Instant::now();
    let result = run(inst.problem.as_ref(), &inst.z0, &sc);
    let wall_time_s = start.elapsed().as_secs_f64();
    let mut row = SummaryRow {
        label: spec.label.clone(),
        kind: sc.kind,
        run: job.run,
        seed,
        budget: job.budget,
        outcome: Err(String::new()),
        wall_time_s,
        trace_file: None,
    };
    match result {
        Ok(trace) => {
            let name = trace_file_name(&spec.label, job.run, job.budget);
            let path = out_dir.join(&name);
            fs::write(&path, render_trace(&trace.records)).map_err(io_err(&path))?;
            if keep_path {
                let p = path.with_extension("path.csv");
                fs::write(&p, render_path(&trace.path)).map_err(io_err(&p))?;
            }
            row.outcome = Ok(outcome(&trace));
            row.trace_file = Some(name);
        }
        Err(e) => row.outcome = Err(e.to_string()),
    }
    Ok(row)
}

fn outcome(trace: &SolverTrace) -> RunOutcome {
    RunOutcome {
        iterations: trace.records.len(),
        oracle_calls: trace.oracle_calls(),
        accepted_steps: trace.accepted_steps(),
        final_op_norm: trace.final_op_norm().unwrap_or(f64::NAN),
        final_merit: trace.final_merit().unwrap_or(f64::NAN),
        min_norm: trace.min_norm,
        max_norm: trace.max_norm,
        diverged: trace.diverged,
    }
}

pub fn render_summary(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{},{},{},{},{},", r.label, r.kind, r.run, r.seed, r.budget);
        match &r.outcome {
            Ok(o) => {
                let _ = write!(
                    out,
                    "{},{},{},{},{},{},{},{},0,",
                    o.iterations,
                    o.oracle_calls,
                    o.accepted_steps,
                    fmt_float(o.final_op_norm),
                    fmt_float(o.final_merit),
                    fmt_float(o.min_norm),
                    fmt_float(o.max_norm),
                    u8::from(o.diverged),
                );
            }
            Err(_) => out.push_str(",,,,,,,,1,"),
        }
        let error = r
            .outcome
            .as_ref()
            .err()
            .map_or(String::new(), |e| e.replace([',', '\n', '\r'], ";"));
        let _ = writeln!(
            out,
            "{:.6},{},{}",
            r.wall_time_s,
            r.trace_file.as_deref().unwrap_or(""),
            error
        );
    }
    out
}

/// `convergence.svg` (and `trajectory.svg` for two-dimensional problems)
/// from run 0 at the first budget.
fn write_plots(cfg: &ExperimentConfig, inst: &Instance, out_dir: &Path) -> Result<(), RunError> {
    let budget = cfg.budgets[0];
    let mut convergence = Vec::new();
    let mut paths = Vec::new();
    for spec in &cfg.solvers {
        let mut sc = spec.config.clone();
        sc.budget = budget;
        sc.seed = derive_seed(cfg.master_seed, 0);
        sc.record_path = inst.problem.dim() == 2;
        let Ok(trace) = run(inst.problem.as_ref(), &inst.z0, &sc) else {
            continue;
        };
        convergence.push(Series::convergence(&spec.label, &trace.records));
        if sc.record_path {
            let pts: Vec<Vec<f64>> = trace.path.iter().map(Point::to_vec).collect();
            paths.push(Series::trajectory(&spec.label, &pts)?);
        }
    }
    let p = out_dir.join("convergence.svg");
    fs::write(&p, convergence_svg(&convergence)).map_err(io_err(&p))?;
    if !paths.is_empty() {
        let p = out_dir.join("trajectory.svg");
        fs::write(&p, trajectory_svg(&paths)).map_err(io_err(&p))?;
    }
    Ok(())
}
