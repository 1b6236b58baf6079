//! Driver for `hax`: configuration, commands and report rendering.

pub mod commands;
pub mod config;
pub mod svg;

pub use commands::{run, CliError, Command};
pub use config::{parse_config, ConfigErrors, ExperimentConfig, ParseError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
