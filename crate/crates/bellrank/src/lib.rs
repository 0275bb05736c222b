//! Command-line front end for `bellrank-core`: file formats, report
//! envelopes and the `bellrank` subcommands.

pub mod cli;
pub mod commands;
pub mod error;
pub mod io;
pub mod report;

pub use error::{CliError, Result};
