//! Subcommands and their exit-code mapping.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use seqpar_core::{classify, complexity, dense_sample_oracle, plan, stratum_piece_count, verify, Scenario};

use crate::format::{write_csv, ScenarioFile, TrajectoryFile};
use crate::svg;

/// Largest tolerated gap between the analytic report and the sampling oracle.
pub const ORACLE_AGREEMENT: f64 = 1e-6;

/// Samples per piece for the fallback oracle when no closed form applies.
const FALLBACK_SAMPLES: usize = 1000;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] seqpar_core::Error),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Core(seqpar_core::Error::NumericallyDegenerate { .. }) => 3,
            CliError::Invalid(_) | CliError::Core(_) => 2,
            CliError::VerifyFailed(_) => 4,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "seqpar", version, about = "Sequential parametrized motion planning among point obstacles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plan a trajectory for a scenario file.
    Plan(PlanArgs),
    /// Print the stratum of a scenario.
    Classify(ClassifyArgs),
    /// Check a trajectory against its scenario.
    Verify(VerifyArgs),
    /// Print the piece count and complexity for given sizes.
    Count(CountArgs),
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Number of uniform sample times for the CSV companion.
    #[arg(long, default_value_t = 101, requires = "csv", value_parser = clap::value_parser!(u64).range(2..))]
    pub samples: u64,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Planar scenarios only.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub scenario: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub trajectory: PathBuf,
    /// Also run the sampling oracle with this many samples per piece.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub oracle_samples: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[arg(long = "m")]
    pub m: usize,
    #[arg(long = "n")]
    pub n: usize,
    #[arg(long = "r")]
    pub r: usize,
}

/// Settings taken from the environment.
#[derive(Debug, Clone, Default)]
pub struct Context {
    /// Default `tol_eq` for scenario files without their own `tolerance`.
    pub tol: Option<f64>,
}

impl Context {
    /// Reads `SEQPAR_TOL`, a positive decimal.
    pub fn from_env() -> CliResult<Self> {
        match std::env::var("SEQPAR_TOL") {
            Ok(raw) => Ok(Context {
                tol: Some(parse_tol(&raw)?),
            }),
            Err(_) => Ok(Context::default()),
        }
    }
}

fn parse_tol(raw: &str) -> CliResult<f64> {
    match raw.trim().parse::<f64>() {
        Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
        _ => Err(CliError::Invalid(format!("SEQPAR_TOL must be a positive decimal, got {raw:?}"))),
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write(path: &Path, contents: &[u8]) -> CliResult<()> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn load_scenario(path: &Path, ctx: &Context) -> CliResult<Scenario> {
    let text = read(path)?;
    let file: ScenarioFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Invalid(format!("{}: malformed scenario: {e}", path.display())))?;
    Ok(file.to_scenario(ctx.tol)?)
}

pub fn run(cli: &Cli, ctx: &Context, out: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Plan(a) => cmd_plan(a, ctx, out),
        Command::Classify(a) => cmd_classify(a, ctx, out),
        Command::Verify(a) => cmd_verify(a, ctx, out),
        Command::Count(a) => cmd_count(a, out),
    }
}

fn stdout_err(e: io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

pub fn cmd_plan(args: &PlanArgs, ctx: &Context, out: &mut dyn Write) -> CliResult<()> {
    let scenario = load_scenario(&args.scenario, ctx)?;
    if args.svg.is_some() && scenario.dim() != 2 {
        return Err(CliError::Invalid(format!(
            "--svg needs a planar scenario (d = 2), got d = {}",
            scenario.dim()
        )));
    }
    let bundle = plan(&scenario)?;
    let file = TrajectoryFile::from_bundle(&bundle);
    let json = serde_json::to_vec_pretty(&file).expect("trajectory serializes");
    write(&args.out, &json)?;
    if let Some(path) = &args.csv {
        let mut buf = Vec::new();
        write_csv(&bundle, args.samples as usize, &mut buf).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        write(path, &buf)?;
    }
    if let Some(path) = &args.svg {
        write(path, svg::render(&scenario, &bundle)?.as_bytes())?;
    }
    writeln!(
        out,
        "stratum {}{}; wrote {}",
        bundle.stratum,
        if bundle.desingularized { " (desingularized)" } else { "" },
        args.out.display()
    )
    .map_err(stdout_err)
}

pub fn cmd_classify(args: &ClassifyArgs, ctx: &Context, out: &mut dyn Write) -> CliResult<()> {
    let scenario = load_scenario(&args.scenario, ctx)?;
    let st = classify(&scenario)?;
    writeln!(out, "{st}").map_err(stdout_err)?;
    writeln!(out, "c={} s={} t={}", st.c, st.s, st.t).map_err(stdout_err)
}

pub fn cmd_verify(args: &VerifyArgs, ctx: &Context, out: &mut dyn Write) -> CliResult<()> {
    let scenario = load_scenario(&args.scenario, ctx)?;
    let text = read(&args.trajectory)?;
    let file: TrajectoryFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Invalid(format!("{}: malformed trajectory: {e}", args.trajectory.display())))?;
    let bundle = file
        .to_bundle()
        .map_err(|e| CliError::VerifyFailed(format!("trajectory is not a valid path family: {e}")))?;

    let oracle_samples = args.oracle_samples.map(|n| n as usize);
    let (report, mut problems) = match verify(&scenario, &bundle) {
        Ok(report) => (report, Vec::new()),
        Err(seqpar_core::Error::NonAnalyticPair(i, j, a, b)) => {
            let samples = oracle_samples.unwrap_or(FALLBACK_SAMPLES);
            eprintln!(
                "robots {} and {} move along curves together on [{a}, {b}]; using the sampling oracle ({samples} samples per piece)",
                i + 1,
                j + 1
            );
            (dense_sample_oracle(&scenario, &bundle, samples)?, Vec::new())
        }
        Err(e @ seqpar_core::Error::ShapeMismatch(_)) => return Err(CliError::VerifyFailed(e.to_string())),
        Err(e) => return Err(e.into()),
    };

    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    writeln!(out, "{json}").map_err(stdout_err)?;

    if !report.passed() {
        problems.push("report invariants violated".to_string());
    }
    let expected = classify(&scenario)?;
    if report.stratum != expected {
        problems.push(format!("trajectory claims stratum {}, scenario is in {expected}", report.stratum));
    }
    if let Some(samples) = oracle_samples {
        let oracle = dense_sample_oracle(&scenario, &bundle, samples)?;
        let diff = report.max_difference(&oracle);
        if !(diff <= ORACLE_AGREEMENT) || oracle.base_constant != report.base_constant {
            problems.push(format!("sampling oracle disagrees by {diff:e}"));
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(CliError::VerifyFailed(problems.join("; ")))
    }
}

pub fn cmd_count(args: &CountArgs, out: &mut dyn Write) -> CliResult<()> {
    let pieces = stratum_piece_count(args.m, args.n, args.r)?;
    let cx = complexity(args.m, args.n, args.r)?;
    writeln!(out, "pieces {pieces}").map_err(stdout_err)?;
    writeln!(out, "complexity {cx}").map_err(stdout_err)
}
