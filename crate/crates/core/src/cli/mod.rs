//! Command-line front end. Every command reads a `key = value` config, writes
//! CSV and JSON into an output directory and stamps each file with the
//! config hash.

mod config;
mod diagnose;
mod estimates;
mod kernel_table;
mod output;
mod picard;
mod simulate;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};

pub use config::{parse_pairs, ExperimentConfig};
pub use output::Output;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DIVERGENCE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sgm", version, about = "Experiments for the surface growth model u_t + u_xxxx + (u_x^2)_xx = 0")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Config file with `key = value` lines.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, short, default_value = ".")]
    pub out: PathBuf,
    /// Extra `key=value` override, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kernel profile table and decay-law fits.
    KernelTable(CommonArgs),
    /// Run the pseudospectral solver; writes a checkpoint and an energy report.
    Simulate(CommonArgs),
    /// Cylinder census, Serrin norms and Poincaré ratios of a checkpoint.
    Diagnose {
        #[command(flatten)]
        common: CommonArgs,
        /// Trajectory checkpoint; overrides the `checkpoint` key.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Picard iteration for the localized mild equation.
    Picard(CommonArgs),
    /// Empirical constants of the space-time convolution estimates.
    VerifyEstimates(CommonArgs),
}

/// What a command reports back besides its files.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Completed,
    Diverged,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::KernelTable(_) => "kernel-table",
            Command::Simulate(_) => "simulate",
            Command::Diagnose { .. } => "diagnose",
            Command::Picard(_) => "picard",
            Command::VerifyEstimates(_) => "verify-estimates",
        }
    }

    fn common(&self) -> &CommonArgs {
        match self {
            Command::KernelTable(c)
            | Command::Simulate(c)
            | Command::Picard(c)
            | Command::VerifyEstimates(c) => c,
            Command::Diagnose { common, .. } => common,
        }
    }

    fn defaults(&self) -> &'static [(&'static str, &'static str)] {
        match self {
            Command::KernelTable(_) => kernel_table::DEFAULTS,
            Command::Simulate(_) => simulate::DEFAULTS,
            Command::Diagnose { .. } => diagnose::DEFAULTS,
            Command::Picard(_) => picard::DEFAULTS,
            Command::VerifyEstimates(_) => estimates::DEFAULTS,
        }
    }
}

/// Resolves the config and runs the command.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let cmd = &cli.command;
    let common = cmd.common();
    let mut extra = common.set.clone();
    if let Command::Diagnose { checkpoint: Some(p), .. } = cmd {
        extra.push(format!("checkpoint={}", p.display()));
    }
    let cfg = ExperimentConfig::load(cmd.name(), cmd.defaults(), common.config.as_deref(), &extra)?;
    let out = Output::create(&common.out, &cfg)?;
    match cmd {
        Command::KernelTable(_) => kernel_table::run(&cfg, &out),
        Command::Simulate(_) => simulate::run(&cfg, &out),
        Command::Diagnose { .. } => diagnose::run(&cfg, &out),
        Command::Picard(_) => picard::run(&cfg, &out),
        Command::VerifyEstimates(_) => estimates::run(&cfg, &out),
    }
}

pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(Outcome::Completed) => EXIT_OK,
        Ok(Outcome::Diverged) | Err(Error::Divergence { .. }) => EXIT_DIVERGENCE,
        Err(_) => EXIT_USAGE,
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = execute(&cli);
    match &result {
        Ok(Outcome::Diverged) => eprintln!("sgm {}: numerical divergence, partial output written", cli.command.name()),
        Err(e) => eprintln!("sgm {}: {e}", cli.command.name()),
        Ok(Outcome::Completed) => {}
    }
    exit_code(&result)
}

pub fn run_from_env() -> i32 {
    run(std::env::args_os())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn help_and_bad_usage_codes() {
        assert_eq!(run(["sgm", "--help"]), EXIT_OK);
        assert_eq!(run(["sgm", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["sgm", "simulate", "--bogus"]), EXIT_USAGE);
    }

    #[test]
    fn divergence_maps_to_code_two() {
        assert_eq!(exit_code(&Err(Error::Divergence { time: 1.0 })), EXIT_DIVERGENCE);
        assert_eq!(exit_code(&Ok(Outcome::Diverged)), EXIT_DIVERGENCE);
        assert_eq!(exit_code(&Err(Error::Config("x".into()))), EXIT_USAGE);
    }
}
