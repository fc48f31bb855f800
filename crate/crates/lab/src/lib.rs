//! Experiment runner around `margulis-core`: configuration, the verification
//! suites behind each subcommand, and JSON/CSV reports.

pub mod config;
pub mod report;
pub mod suites;

use std::path::Path;

use config::{Command, ConfigError, ExperimentConfig, Overrides};

/// Reads the optional config file, lays the flags over it and validates.
pub fn load_config(
    command: Command,
    file: Option<&Path>,
    flags: Overrides,
) -> Result<ExperimentConfig, ConfigError> {
    let base = match file {
        Some(p) => Overrides::from_file(p)?,
        None => Overrides::default(),
    };
    ExperimentConfig::resolve(command, flags.over(base))
}
