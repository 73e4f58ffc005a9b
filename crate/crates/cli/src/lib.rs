//! The `cud` command line.
//!
//! Exit codes: 0 on success, 2 for invalid input or flags, 3 when a checked
//! invariant is violated (including corrupt event logs), 4 for I/O failures.

mod error;
mod experiment;
mod game;
mod profile;
mod simulate;
mod verify;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

pub use error::CliError;
pub use profile::{load_profile, profile_to_toml, ProfileFile, RandomSpec};
pub use simulate::render_steps;

#[derive(Debug, Parser)]
#[command(name = "cud", version, about = "Iterative voting under a deadline")]
pub struct Cli {
    /// Seed for every random choice the command makes.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (or directory for `experiment` and `gen-profiles`,
    /// storage directory for `serve`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// More logging (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    pub fn log_level(&self) -> &'static str {
        match self.verbose {
            0 => "warn",
            1 => "info",
            _ => "debug",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Play one election and print the step table.
    Simulate(simulate::SimulateArgs),
    /// Enumerate every pick sequence of one election.
    Oracle(simulate::OracleArgs),
    /// Run checker suites over small exhaustive and seeded random instances.
    Verify(verify::VerifyArgs),
    /// Run a sweep from a TOML config and write CSV tables.
    Experiment(experiment::ExperimentArgs),
    /// Serve the multiplayer game.
    Serve(game::ServeArgs),
    /// Recompute the metrics of a stored game log.
    Replay(game::ReplayArgs),
    /// Write impartial-culture profiles as TOML files.
    GenProfiles(profile::GenArgs),
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let ctx = Context {
        seed: cli.seed.unwrap_or(0),
        seed_given: cli.seed.is_some(),
        out: cli.out,
        format: cli.format,
    };
    match cli.command {
        Command::Simulate(args) => simulate::simulate(&ctx, args),
        Command::Oracle(args) => simulate::oracle(&ctx, args),
        Command::Verify(args) => verify::verify(&ctx, args),
        Command::Experiment(args) => experiment::experiment(&ctx, args),
        Command::Serve(args) => game::serve(&ctx, args),
        Command::Replay(args) => game::replay(&ctx, args),
        Command::GenProfiles(args) => profile::gen_profiles(&ctx, args),
    }
}

/// Flags shared by every command.
#[derive(Debug, Clone)]
pub(crate) struct Context {
    pub seed: u64,
    pub seed_given: bool,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Context {
    /// Writes `text` to `--out` or stdout.
    pub fn emit(&self, text: &str) -> Result<(), CliError> {
        match &self.out {
            Some(path) => write_file(path, text),
            None => stdout(text),
        }
    }
}

/// Prints to stdout; a closed pipe (e.g. `| head`) is not an error.
pub(crate) fn stdout(text: &str) -> Result<(), CliError> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let newline = if text.ends_with('\n') { "" } else { "\n" };
    match write!(out, "{text}{newline}").and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io("stdout", e)),
        _ => Ok(()),
    }
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub(crate) fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output types serialize")
}
