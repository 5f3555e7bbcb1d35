//! Command-line front end for the `salprop` localization pipeline.
//!
//! [`run`] parses arguments, executes a command and returns the process
//! exit code: 0 on success, 1 for data or runtime errors, 2 for usage
//! errors.

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub mod args;
pub mod commands;
pub mod config;

use args::{Cli, Command, RunArgs};
use commands::Sidecars;
use config::{RunConfig, Settings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

/// Resolves flags on top of the optional config file.
pub fn resolve_config(run: &RunArgs) -> Result<RunConfig, CliError> {
    let file = match &run.config {
        Some(path) => Settings::load(path).map_err(CliError::Usage)?,
        None => Settings::default(),
    };
    RunConfig::resolve(file.overlay(run.settings())).map_err(CliError::Usage)
}

pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Localize {
            image,
            saliency_map,
            proposals_file,
            run,
        } => {
            let cfg = resolve_config(&run)?;
            let sidecars = Sidecars {
                saliency: saliency_map.as_deref(),
                proposals: proposals_file.as_deref(),
            };
            commands::cmd_localize(&image, sidecars, &cfg, stdout)?;
        }
        Command::Eval { root, run } => {
            let cfg = resolve_config(&run)?;
            commands::cmd_eval(&root, &cfg, stdout)?;
        }
        Command::Config { run } => {
            let cfg = resolve_config(&run)?;
            commands::cmd_config(&cfg, stdout)?;
        }
        Command::Synth(args) => commands::cmd_synth(&args, stdout)?,
    }
    Ok(())
}

/// Runs the program on `args` (including the program name) and returns its
/// exit code. Help and version go to `stdout`, diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = match &e {
                CliError::Usage(msg) => writeln!(stderr, "error: {msg}"),
                CliError::Data(err) => writeln!(stderr, "error: {err:#}"),
            };
            e.exit_code()
        }
    }
}
