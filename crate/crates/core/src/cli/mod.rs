//! Batch experiment runner behind the `diagdec` binary.

mod config;
mod runner;

pub use config::{
    documented_keys, parse_config, parse_with_overrides, ConfigError, ConfigErrors, ExperimentConfig, Subcommand,
    Value, CHANNEL_KINDS, ENSEMBLE_KINDS, STATE_KINDS,
};
pub use runner::{design_distance, design_interval, fmt_real, run, RunOutput};
