//! `saddle`: batch front-end for the saddle point reduction toolkit.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Suite;
use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "saddle", version, about = "Saddle point reduction, critical groups and multiplicity search")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory; overrides the configured one.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Solve even when a required hypothesis fails.
    #[arg(long, global = true)]
    force: bool,

    /// Fine cubical resolution per axis; the coarse one is half of it.
    #[arg(long, global = true)]
    resolution: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Weighted spectra of the origin and infinity weights.
    Eigen,
    /// Hypothesis checks required by the configured case.
    Check,
    /// Critical point search with the multiplicity prediction.
    Solve,
    /// Homology identities on the shipped model catalog.
    Verify {
        #[arg(value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
    /// Summary of the outputs found in the output directory.
    Report,
}

/// Failures mapped onto the exit code contract.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Violation(String),
    Inconclusive(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Violation(m) => write!(f, "violation: {m}"),
            CliError::Inconclusive(m) => write!(f, "inconclusive: {m}"),
        }
    }
}

impl From<saddle_core::Error> for CliError {
    fn from(e: saddle_core::Error) -> Self {
        match e {
            saddle_core::Error::Unstable { .. } => CliError::Inconclusive(e.to_string()),
            saddle_core::Error::InvalidArgument(_)
            | saddle_core::Error::InvalidGrid(_)
            | saddle_core::Error::Parse { .. }
            | saddle_core::Error::MissingHypothesis(_) => CliError::Usage(e.to_string()),
            _ => CliError::Violation(e.to_string()),
        }
    }
}

/// Result of a completed command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Violation,
    Inconclusive,
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_INCONCLUSIVE: u8 = 2;
pub const EXIT_USAGE: u8 = 3;

/// Settings shared by every subcommand after flag overrides.
pub struct Context {
    pub config: Option<RunConfig>,
    pub out: PathBuf,
    pub force: bool,
    pub resolution: Option<usize>,
    pub seed: Option<u64>,
}

impl Context {
    pub fn config(&self) -> Result<&RunConfig, CliError> {
        self.config
            .as_ref()
            .ok_or_else(|| CliError::Usage("this command needs --config <path>".into()))
    }
}

fn context(cli: &Cli) -> Result<Context, CliError> {
    let mut config = cli.config.as_deref().map(RunConfig::load).transpose()?;
    if let (Some(c), Some(seed)) = (config.as_mut(), cli.seed) {
        c.seed = seed;
    }
    let out = cli
        .out
        .clone()
        .or_else(|| config.as_ref().and_then(|c| c.output.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok(Context {
        config,
        out,
        force: cli.force,
        resolution: cli.resolution,
        seed: cli.seed,
    })
}

fn run(cli: &Cli) -> Result<Status, CliError> {
    let ctx = context(cli)?;
    match &cli.command {
        Command::Eigen => commands::eigen(&ctx),
        Command::Check => commands::check(&ctx),
        Command::Solve => commands::solve(&ctx),
        Command::Verify { suite } => commands::verify(&ctx, *suite),
        Command::Report => commands::report(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let code = match run(&cli) {
        Ok(Status::Ok) => EXIT_OK,
        Ok(Status::Violation) => EXIT_VIOLATION,
        Ok(Status::Inconclusive) => EXIT_INCONCLUSIVE,
        Err(e) => {
            eprintln!("saddle: {e}");
            match e {
                CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
                CliError::Violation(_) => EXIT_VIOLATION,
                CliError::Inconclusive(_) => EXIT_INCONCLUSIVE,
            }
        }
    };
    ExitCode::from(code)
}
