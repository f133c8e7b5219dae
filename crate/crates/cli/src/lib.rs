//! Command-line front end for `lticontract`: model files, subcommands and
//! report output.

pub mod commands;
pub mod model_file;
pub mod number;

pub use commands::{exit_code, run, Cli, CliError, Command};
pub use model_file::{ModelFile, ParseError};
