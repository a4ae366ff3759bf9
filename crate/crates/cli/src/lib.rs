//! Command-line front end: CSV ingestion, JSON run configs, and the `fit`,
//! `simulate` and `diagnose` workflows.

pub mod commands;
pub mod config;
pub mod data;
pub mod error;

pub use config::{Command, Overrides, RunConfig};
pub use error::{CliError, IngestError};

/// Resolves the configuration and runs `command` on a pool of `threads` workers when requested.
pub fn run(command: Command, flags: &Overrides) -> Result<Vec<String>, CliError> {
    let cfg = RunConfig::resolve(command, flags)?;
    match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(|| commands::execute(command, &cfg)),
        None => commands::execute(command, &cfg),
    }
}
