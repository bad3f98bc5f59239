//! Command-line runner for the curation game: scenario presets, TOML run
//! configs, CSV outputs with checksummed manifests, and the check battery.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
