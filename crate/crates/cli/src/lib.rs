//! File ingestion, report emission, and the command implementations
//! behind the `syndse` binary. Exposed as a library so integration tests
//! drive the same code paths as the executable.

#![forbid(unsafe_code)]

pub mod args;
pub mod commands;
pub mod error;
pub mod io;
pub mod manifest;
pub mod report;

pub use error::{CliError, Result};

use args::{Cli, Command};

/// Dispatch a parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Estimate(args) => commands::cmd_estimate(args),
        Command::Allocate(args) => commands::cmd_allocate(args),
        Command::Compare(args) => commands::cmd_compare(args),
        Command::Sad(args) => commands::cmd_sad(args),
        Command::Mir(args) => commands::cmd_mir(args),
        Command::Homogeneity(args) => commands::cmd_homogeneity(args),
        Command::Variance(args) => commands::cmd_variance(args),
        Command::Simulate(args) => commands::cmd_simulate(args),
        Command::Validate(args) => commands::cmd_validate(args),
    }
}
