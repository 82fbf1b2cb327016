//! Configuration loading and the subcommands behind the `halfstokes` binary.

pub mod commands;
pub mod config;

pub use commands::{cmd_kernel_table, cmd_norms, cmd_solve, cmd_verify, CliError};
pub use config::{ConfigError, RunConfig};
