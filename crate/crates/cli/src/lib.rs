//! Configuration, dispatch and artifact export for the `wdlab` command.

pub mod config;
pub mod run;

pub use config::{parse_config, parse_config_for, Command, ConfigError, InitialData, RunConfig};
pub use run::{run, Manifest, Outcome, RunError, Status};
