//! Command-line front end: config parsing, condition checks, solves and
//! the built-in verification suite.

pub mod commands;
pub mod config;
pub mod expr;

pub use commands::{CliError, ExitStatus, Overrides, Requirement, VerifyOptions};
pub use config::RunConfig;
