//! `phavail`: availability curves, steady-state tables, sensitivity sweeps
//! and cross-checks for series/parallel systems with Lindley failure times.

pub mod commands;
pub mod config;
pub mod report;
pub mod svg;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use commands::{CommandOutput, Param, SensitivityRequest, TimeGrid, VerifyOptions};
use config::{parse_model_config, AnalysisConfig, ModelConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Config {
        path: PathBuf,
        source: config::ConfigError,
    },
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Analysis(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_CONFIG,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "phavail", version, about = "Availability analysis for repairable systems with Lindley failure times")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Availability curves under Lindley and exponential failure laws.
    Availability(CurveArgs),
    /// Availability with repair against survival without repair.
    Reliability(CurveArgs),
    /// Long-run availability per component and for the system.
    SteadyState(SteadyArgs),
    /// Lindley steady-state availability and its derivative over a rate sweep.
    Sensitivity(SensitivityArgs),
    /// Cross-check closed forms against CTMC solves and simulation.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct ModelArg {
    /// Model file (JSON).
    #[arg(long, value_name = "PATH")]
    model: PathBuf,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long, value_name = "DAYS")]
    t_start: Option<f64>,
    #[arg(long, value_name = "DAYS")]
    t_stop: Option<f64>,
    #[arg(long, value_name = "N")]
    points: Option<usize>,
    /// Logarithmic spacing (needs a positive --t-start).
    #[arg(long)]
    log: bool,
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[command(flatten)]
    model: ModelArg,
    #[command(flatten)]
    grid: GridArgs,
    /// Write CSV here instead of stdout.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SteadyArgs {
    #[command(flatten)]
    model: ModelArg,
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ParamArg {
    Lambda,
    Mu,
}

#[derive(Debug, Args)]
struct SensitivityArgs {
    #[command(flatten)]
    model: ModelArg,
    /// Rate to vary; both when omitted.
    #[arg(long, value_enum)]
    param: Option<ParamArg>,
    /// Comma-separated values; defaults to 0.5, 1, 1.5 and 2 times nominal.
    #[arg(long, value_delimiter = ',', requires = "param")]
    values: Option<Vec<f64>>,
    /// Restrict to one component label.
    #[arg(long)]
    component: Option<String>,
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    model: ModelArg,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    reps: usize,
    /// Simulated days per replication.
    #[arg(long, default_value_t = 1e5)]
    horizon: f64,
    /// Tolerance for the deterministic checks.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

fn load(path: &Path) -> Result<ModelConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })?;
    parse_model_config(&text).map_err(|source| CliError::Config {
        path: path.to_owned(),
        source,
    })
}

/// Flags override the model's `analysis` block, which overrides the defaults.
fn resolve_grid(flags: &GridArgs, analysis: &AnalysisConfig) -> Result<TimeGrid, CliError> {
    let d = TimeGrid::default();
    let grid = TimeGrid {
        start: flags.t_start.or(analysis.t_start).unwrap_or(d.start),
        stop: flags.t_stop.or(analysis.t_stop).unwrap_or(d.stop),
        points: flags.points.or(analysis.points).unwrap_or(d.points),
        log: flags.log || analysis.log_spacing.unwrap_or(d.log),
    };
    grid.validate().map_err(|msg| {
        let from_flags = flags.t_start.is_some() || flags.t_stop.is_some() || flags.points.is_some() || flags.log;
        if from_flags {
            CliError::Usage(msg)
        } else {
            CliError::Analysis(format!("analysis block: {msg}"))
        }
    })?;
    Ok(grid)
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let err = |source| CliError::Write {
        path: path.to_owned(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(contents.as_bytes()).map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

fn dispatch(command: Command) -> Result<CommandOutput, CliError> {
    match command {
        Command::Availability(a) => {
            let cfg = load(&a.model.model)?;
            let grid = resolve_grid(&a.grid, &cfg.analysis)?;
            commands::availability(&cfg.model, &grid, a.csv, a.svg)
        }
        Command::Reliability(a) => {
            let cfg = load(&a.model.model)?;
            let grid = resolve_grid(&a.grid, &cfg.analysis)?;
            commands::reliability(&cfg.model, &grid, a.csv, a.svg)
        }
        Command::SteadyState(a) => {
            let cfg = load(&a.model.model)?;
            commands::steady_state(&cfg.model, a.csv)
        }
        Command::Sensitivity(a) => {
            if let Some(bad) = a.values.iter().flatten().find(|v| !(**v > 0.0 && v.is_finite())) {
                return Err(CliError::Usage(format!("--values must be positive, got {bad}")));
            }
            let cfg = load(&a.model.model)?;
            let params = match a.param {
                Some(ParamArg::Lambda) => vec![Param::Lambda],
                Some(ParamArg::Mu) => vec![Param::Mu],
                None => vec![Param::Lambda, Param::Mu],
            };
            let request = SensitivityRequest {
                params,
                values: a.values,
                component: a.component.as_deref(),
            };
            commands::sensitivity(&cfg.model, &request, a.csv)
        }
        Command::Verify(a) => {
            if a.reps == 0 || !(a.horizon > 0.0 && a.horizon.is_finite()) || !(a.tol >= 0.0) {
                return Err(CliError::Usage("--reps, --horizon and --tol must be positive".into()));
            }
            let cfg = load(&a.model.model)?;
            let opts = VerifyOptions {
                grid: resolve_grid(&a.grid, &cfg.analysis)?,
                tol: a.tol,
                seed: a.seed,
                replications: a.reps,
                horizon: a.horizon,
                ..VerifyOptions::default()
            };
            commands::verify(&cfg.model, &opts, a.csv)
        }
    }
}

/// Runs one invocation and returns the process exit code.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                EXIT_USAGE
            } else {
                let _ = stdout.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    let output = dispatch(cli.command).and_then(|out| {
        for (path, contents) in &out.files {
            write_atomic(path, contents)?;
        }
        Ok(out)
    });
    match output {
        Ok(out) => {
            let _ = stdout.write_all(out.stdout.as_bytes());
            if out.verification_failed {
                EXIT_VERIFY_FAILED
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
