//! Sweep drivers behind the `qcertify` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod fit;
pub mod output;

pub use commands::{run, CommandKind, RunOptions};
pub use error::CliError;
