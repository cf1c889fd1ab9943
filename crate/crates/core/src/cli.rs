//! `taurob` command-line front end.
//!
//! Exit codes: 0 success, 1 invalid configuration, 2 model validation
//! failure, 3 solver infeasibility.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::divergence;
use crate::dynamic;
use crate::error::{Error, Result};
use crate::io::{self, Model};
use crate::models::{GaussianPair, JointGaussian, SpectralModel, TauBall};
use crate::report::{self, BallReport, DivergenceReport, SpectralReport, StaticReport, SweepReport};
use crate::static_robust::{self, SweepRow, DEFAULT_REL_TOL};

pub const THREADS_ENV: &str = "TAUROB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "taurob",
    version,
    about = "Least-favorable statistics in tau-divergence balls"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Divergence of an actual model from a nominal one.
    Divergence(DivergenceArgs),
    /// Least-favorable statistics of a static model.
    Static(WorstCaseArgs),
    /// Least-favorable spectrum of a stationary model.
    Dynamic(WorstCaseArgs),
    /// Extra MSE over log-spaced tolerances for several tau.
    Sweep(SweepArgs),
    /// Boundary of a scalar ball in the (mean, variance) plane.
    Ball(BallArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct DivergenceArgs {
    #[arg(long)]
    pub actual: PathBuf,
    #[arg(long)]
    pub nominal: PathBuf,
    #[arg(long)]
    pub tau: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
#[group(id = "budget", required = true, multiple = false, args = ["c", "lambda"])]
pub struct WorstCaseArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub tau: f64,
    /// Ball radius (hard constraint).
    #[arg(long)]
    pub c: Option<f64>,
    /// Lagrange multiplier (soft constraint).
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    pub rel_tol: f64,
    /// Emit every frequency of a spectral report.
    #[arg(long)]
    pub full_grid: bool,
    /// Randomized saddle-point check with this many laws and estimators
    /// (static hard ball only).
    #[arg(long, default_value_t = 0)]
    pub saddle_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Comma-separated list.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub tau: Vec<f64>,
    #[arg(long, default_value_t = 0.001)]
    pub c_min: f64,
    #[arg(long, default_value_t = 0.1)]
    pub c_max: f64,
    #[arg(long, default_value_t = 25)]
    pub steps: usize,
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    pub rel_tol: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BallArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub mean: f64,
    #[arg(long)]
    pub var: f64,
    #[arg(long)]
    pub tau: f64,
    #[arg(long)]
    pub c: f64,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidTau(_) | Error::InvalidParameter(_) | Error::Io(_) => 1,
        Error::InfeasibleMultiplier { .. } | Error::UnsatisfiableTolerance { .. } | Error::Domain { .. } => 3,
        Error::NotSymmetric { .. }
        | Error::NotPositiveDefinite { .. }
        | Error::Dimension(_)
        | Error::SingularObservation { .. }
        | Error::Singular { .. }
        | Error::Validation(_)
        | Error::Json(_) => 2,
    }
}

fn load(path: &Path) -> Result<Model> {
    io::load_model(path).map_err(|e| match e {
        Error::Io(io) => Error::InvalidParameter(format!("cannot read {}: {io}", path.display())),
        other => other,
    })
}

fn load_static(path: &Path) -> Result<JointGaussian> {
    match load(path)? {
        Model::Static(m) => Ok(m),
        Model::Spectral(_) => Err(Error::InvalidParameter(format!(
            "{} holds a spectral model, expected a static one",
            path.display()
        ))),
    }
}

fn load_spectral(path: &Path) -> Result<SpectralModel> {
    match load(path)? {
        Model::Spectral(m) => Ok(m),
        Model::Static(_) => Err(Error::InvalidParameter(format!(
            "{} holds a static model, expected a spectral one",
            path.display()
        ))),
    }
}

fn ball_of(args: &WorstCaseArgs) -> Result<TauBall> {
    match (args.c, args.lambda) {
        (Some(c), None) => TauBall::hard(args.tau, c),
        (None, Some(l)) => TauBall::soft(args.tau, l),
        _ => Err(Error::InvalidParameter(
            "exactly one of --c and --lambda is required".into(),
        )),
    }
}

fn check_rel_tol(rel_tol: f64) -> Result<()> {
    if rel_tol > 0.0 && rel_tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "--rel-tol must be positive, got {rel_tol}"
        )))
    }
}

/// Rendered output and messages for stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub warnings: Vec<String>,
}

fn render<T: serde::Serialize>(value: &T, format: Format, csv: impl Fn(&T) -> String) -> String {
    match format {
        Format::Json => report::to_json(value),
        Format::Csv => csv(value),
    }
}

fn run_divergence(args: &DivergenceArgs) -> Result<Output> {
    let value = match (load(&args.actual)?, load(&args.nominal)?) {
        (Model::Static(a), Model::Static(n)) => {
            divergence::tau_divergence(&GaussianPair::new(n, a)?, args.tau)?
        }
        (Model::Spectral(a), Model::Spectral(n)) => divergence::spectral_tau_divergence(&a, &n, args.tau)?,
        _ => {
            return Err(Error::InvalidParameter(
                "--actual and --nominal must both be static or both spectral".into(),
            ))
        }
    };
    let r = DivergenceReport::new(args.tau, value.value());
    Ok(Output {
        text: render(
            &r,
            args.out.format.unwrap_or(Format::Json),
            DivergenceReport::to_csv,
        ),
        warnings: Vec::new(),
    })
}

fn run_static(args: &WorstCaseArgs) -> Result<Output> {
    check_rel_tol(args.rel_tol)?;
    let model = load_static(&args.model)?;
    let ball = ball_of(args)?;
    let w = static_robust::worst_case_static(&model, &ball, args.rel_tol)?;
    let mut warnings = Vec::new();
    let saddle = match (args.saddle_samples, args.c) {
        (0, _) => None,
        (k, Some(c)) if c > 0.0 => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            Some(static_robust::saddle_point_check(&model, &w, c, k, k, &mut rng)?)
        }
        _ => {
            warnings.push("saddle-point check skipped: needs a hard ball with c > 0".into());
            None
        }
    };
    let r = StaticReport::new(&w, saddle);
    Ok(Output {
        text: render(&r, args.out.format.unwrap_or(Format::Json), StaticReport::to_csv),
        warnings,
    })
}

fn run_dynamic(args: &WorstCaseArgs) -> Result<Output> {
    check_rel_tol(args.rel_tol)?;
    let model = load_spectral(&args.model)?;
    let ball = ball_of(args)?;
    let w = dynamic::worst_case_spectral(&model, &ball, args.rel_tol)?;
    let r = SpectralReport::new(&w, args.full_grid);
    Ok(Output {
        text: render(
            &r,
            args.out.format.unwrap_or(Format::Json),
            SpectralReport::to_csv,
        ),
        warnings: w.warnings,
    })
}

fn run_sweep(args: &SweepArgs) -> Result<Output> {
    check_rel_tol(args.rel_tol)?;
    if !(args.c_min > 0.0 && args.c_min <= args.c_max && args.c_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < --c-min <= --c-max, got {} and {}",
            args.c_min, args.c_max
        )));
    }
    if args.steps == 0 {
        return Err(Error::InvalidParameter("--steps must be at least 1".into()));
    }
    let cs = static_robust::log_spaced(args.c_min, args.c_max, args.steps);
    let mut warnings = Vec::new();
    let rows = match load(&args.model)? {
        Model::Static(m) => {
            let p = static_robust::nominal_error_cov(&m)?;
            static_robust::delta_mse_sweep(&p, &args.tau, &cs, args.rel_tol)?
        }
        Model::Spectral(m) => {
            let jobs: Vec<(f64, f64)> = args
                .tau
                .iter()
                .flat_map(|&t| cs.iter().map(move |&c| (t, c)))
                .collect();
            let solved = jobs
                .par_iter()
                .map(|&(tau, c)| {
                    let w = dynamic::worst_case_spectral(&m, &TauBall::hard(tau, c)?, args.rel_tol)?;
                    Ok((
                        SweepRow {
                            tau,
                            c,
                            lambda: w.lambda,
                            delta_mse: w.delta_mse,
                        },
                        w.warnings,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut rows = Vec::with_capacity(solved.len());
            for (row, w) in solved {
                for msg in w {
                    if !warnings.contains(&msg) {
                        warnings.push(msg);
                    }
                }
                rows.push(row);
            }
            rows
        }
    };
    let r = SweepReport::new(&rows);
    Ok(Output {
        text: render(&r, args.out.format.unwrap_or(Format::Csv), SweepReport::to_csv),
        warnings,
    })
}

fn run_ball(args: &BallArgs) -> Result<Output> {
    let points = static_robust::ball_boundary_scalar(args.mean, args.var, args.tau, args.c, args.points)?;
    let r = BallReport {
        mean: args.mean,
        var: args.var,
        tau: args.tau,
        c: args.c,
        points: points.into_iter().map(|(m, k)| [m, k]).collect(),
    };
    Ok(Output {
        text: render(&r, args.out.format.unwrap_or(Format::Csv), BallReport::to_csv),
        warnings: Vec::new(),
    })
}

fn output_path(config: &RunConfig) -> Option<&Path> {
    match &config.command {
        Command::Divergence(a) => a.out.output.as_deref(),
        Command::Static(a) | Command::Dynamic(a) => a.out.output.as_deref(),
        Command::Sweep(a) => a.out.output.as_deref(),
        Command::Ball(a) => a.out.output.as_deref(),
    }
}

/// Compute the output of one command without writing it anywhere.
pub fn execute(config: &RunConfig) -> Result<Output> {
    match &config.command {
        Command::Divergence(a) => run_divergence(a),
        Command::Static(a) => run_static(a),
        Command::Dynamic(a) => run_dynamic(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Ball(a) => run_ball(a),
    }
}

/// Write `text` to `path` through a temporary file in the same directory.
pub fn write_atomically(path: &Path, text: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Run one command, write its output and return the process exit code.
pub fn run(config: &RunConfig) -> i32 {
    let result = execute(config).and_then(|out| {
        for w in &out.warnings {
            eprintln!("warning: {w}");
        }
        match output_path(config) {
            Some(path) => write_atomically(path, &out.text),
            None => {
                // A reader that stops early (`| head`) is not an error.
                match std::io::stdout().lock().write_all(out.text.as_bytes()) {
                    Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                    _ => Ok(()),
                }
            }
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got {raw:?}"))?;
    // a pool set up earlier in the same process is kept
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

/// Parse arguments, honor `TAUROB_THREADS` and run.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return 1;
    }
    run(&config)
}
