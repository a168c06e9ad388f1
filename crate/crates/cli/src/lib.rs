//! Command-line front end of `fblrelay`: scenario configuration, sweeps,
//! mode selection and cross-method validation.

pub mod config;
pub mod error;
pub mod output;
pub mod select;
pub mod sweep;
pub mod validate;

pub use config::{apply_overrides, emit_config, parse_config, ScenarioConfig};
pub use error::CliError;
