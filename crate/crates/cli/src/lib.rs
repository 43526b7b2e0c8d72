//! `wgl`: reproducible experiments on sampled graph surfaces.
//!
//! Every command reads a JSON [`config::RunConfig`], writes its results into
//! an output directory and always leaves a `summary.json` with a `status`
//! field (`ok`, `failed` or `error`) plus a `manifest.json` of file digests.
//! Exit codes: 0 success, 1 failed verdict or runtime error, 2 bad usage or
//! configuration.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::RunConfig;
use output::OutputDir;

pub const THREADS_ENV: &str = "WGL_THREADS";
const DEFAULT_OUT: &str = "wgl-out";

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad config or arguments; exit code 2.
    Config(String),
    /// A computation that could not complete; exit code 1.
    Runtime(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) | CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<wgl_core::Error> for CliError {
    fn from(e: wgl_core::Error) -> Self {
        use wgl_core::Error as E;
        match e {
            E::UnknownSurface(_)
            | E::InvalidParameter(_)
            | E::InvalidGrid(_)
            | E::GridTooSmall { .. }
            | E::DomainViolation { .. }
            | E::InvalidArgument(_) => CliError::Config(e.to_string()),
            E::Io(m) => CliError::Io(m),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "wgl", version, about = "Curvature and Willmore experiments on graph surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Run configuration (JSON).
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads; falls back to WGL_THREADS, then to all cores.
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Curvature fields, energy and oracle errors.
    Analyze(Common),
    /// Residual equivalence, gradient and Stokes checks under refinement.
    Verify(Common),
    /// Area growth and calibration chain over the configured radii.
    AreaGrowth(Common),
    /// Cutoff sweep of the total curvature over the configured σ values.
    TotalCurvature(Common),
    /// Willmore descent flow.
    Flow(Common),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analyze(_) => "analyze",
            Command::Verify(_) => "verify",
            Command::AreaGrowth(_) => "area-growth",
            Command::TotalCurvature(_) => "total-curvature",
            Command::Flow(_) => "flow",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Analyze(c)
            | Command::Verify(c)
            | Command::AreaGrowth(c)
            | Command::TotalCurvature(c)
            | Command::Flow(c) => c,
        }
    }
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Failed,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Failed => "failed",
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var(THREADS_ENV) {
        Ok(s) => s.trim().parse().map_err(|_| CliError::Config(format!("{THREADS_ENV}={s:?} is not a thread count"))),
        Err(_) => Ok(0),
    }
}

/// Parse `args` (program name first), run the command and return the exit
/// code. Messages go to stderr.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(Status::Ok) => 0,
        Ok(Status::Failed) => {
            eprintln!("wgl {}: verification failed", cli.command.name());
            1
        }
        Err(e) => {
            eprintln!("wgl {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}

fn execute(command: &Command) -> Result<Status, CliError> {
    let common = command.common();
    let loaded = RunConfig::load(&common.config);
    let out_root = common
        .out
        .clone()
        .or_else(|| loaded.as_ref().ok().and_then(|c| c.output_dir.clone().map(PathBuf::from)))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let hash = match &loaded {
        Ok(c) => c.hash(),
        Err(_) => "none".to_string(),
    };
    let mut out = OutputDir::create(&out_root, command.name(), hash)?;
    let result = loaded.and_then(|cfg| {
        let threads = thread_count(common.threads)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        pool.install(|| commands::dispatch(command, &cfg, &mut out))
    });
    match result {
        Ok(status) => {
            out.finish(status.as_str())?;
            Ok(status)
        }
        Err(e) => {
            write_error(&mut out, &e)?;
            out.finish("error")?;
            Err(e)
        }
    }
}

fn write_error(out: &mut OutputDir, e: &CliError) -> Result<(), CliError> {
    out.json("summary.json", "error", &json!({ "error": e.to_string(), "exit_code": e.exit_code() }))
}

/// Convenience for tests and scripts: run `command` on a config file.
pub fn run_command(command: &str, config: &Path, out: &Path, threads: Option<usize>) -> i32 {
    let mut args: Vec<OsString> =
        vec!["wgl".into(), command.into(), "--config".into(), config.into(), "--out".into(), out.into()];
    if let Some(n) = threads {
        args.push("--threads".into());
        args.push(n.to_string().into());
    }
    run(args)
}
