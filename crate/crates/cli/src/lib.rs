//! Command implementations behind the `weavenet` binary.

pub mod commands;
pub mod config;
mod error;
pub mod formats;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
