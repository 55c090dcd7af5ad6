//! Experiment runner for the `qnls` library: TOML configs in, data files and
//! a checksummed manifest out.

pub mod config;
pub mod experiments;
pub mod manifest;
pub mod plots;

pub use config::{ConfigError, Experiment, ExperimentConfig, Thresholds};
pub use experiments::{Check, Outcome};
pub use manifest::{run, RunError, RunManifest};
pub use plots::emit_plots;
