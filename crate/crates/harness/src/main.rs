use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vrsda_harness::check::{render_table, run_checks, CheckOptions};
use vrsda_harness::config::ExperimentConfig;
use vrsda_harness::plot::{emit_plot, PlotError, PlotKind};
use vrsda_harness::runner::{run_experiment, RunError, RunOptions};

#[derive(Parser)]
#[command(name = "vrsda", version, about = "Stochastic VI solver experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every solver × run × budget of a config file.
    Run {
        config: PathBuf,
        /// Output directory, overriding the config.
        #[arg(long, env = "VRSDA_OUTPUT_DIR")]
        output_dir: Option<PathBuf>,
        /// Load the regression dataset from a CSV file.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Write the regression dataset to a CSV file.
        #[arg(long)]
        export_data: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run the diagnostic checks and print a pass/fail table.
    Check {
        /// Force the line-search constant of the certificate fixture.
        #[arg(long)]
        override_c: Option<f64>,
    },
    /// Plot trace files as SVG.
    Plot {
        /// `trajectory` or `convergence`.
        kind: String,
        out: PathBuf,
        #[arg(required = true)]
        traces: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            output_dir,
            data,
            export_data,
            threads,
        } => {
            let cfg = match ExperimentConfig::from_path(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{}: {e}", config.display());
                    return ExitCode::from(2);
                }
            };
            let opts = RunOptions {
                output_dir,
                data,
                export_data,
                threads,
            };
            match run_experiment(&cfg, &opts) {
                Ok(report) => {
                    println!(
                        "{} runs written to {} ({} failed)",
                        report.rows.len(),
                        report.output_dir.display(),
                        report.failed()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e.to_string(), run_code(&e)),
            }
        }
        Command::Check { override_c } => {
            let rows = run_checks(&CheckOptions { override_c });
            print!("{}", render_table(&rows));
            let failed: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
            if failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                for r in failed {
                    eprintln!("FAILED {}: observed {}, expected {}", r.name, r.observed, r.expected);
                }
                ExitCode::from(1)
            }
        }
        Command::Plot { kind, out, traces } => {
            let result = kind.parse::<PlotKind>().and_then(|k| emit_plot(k, &out, &traces));
            match result {
                Ok(()) => ExitCode::SUCCESS,
                Err(e @ PlotError::Contract(_)) => fail(&e.to_string(), 2),
                Err(e) => fail(&e.to_string(), 1),
            }
        }
    }
}

fn run_code(e: &RunError) -> u8 {
    e.exit_code() as u8
}

fn fail(msg: &str, code: u8) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}
