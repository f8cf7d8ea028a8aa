//! Command-line experiments for GFT-SVD speech enhancement.
//!
//! Every subcommand is deterministic given its flags: rerunning with the same
//! inputs and seed reproduces every output file byte for byte.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod error;
pub mod pgm;

use std::io::Write;

pub use args::{Cli, Command, Transform};
pub use error::{exit, CliError, CliResult};

/// Runs one parsed command; human-readable progress goes to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Basis(a) => commands::basis::run(&a, out),
        Command::Enhance(a) => commands::enhance::run(&a, out),
        Command::Compare(a) => commands::compare::run(&a, out),
        Command::Render(a) => commands::render::run(&a, out),
        Command::Train(a) => commands::train::run(&a, out),
        Command::Fixtures(a) => commands::fixtures::run(&a, out),
    }
}
