//! Operator surface for swarmsec: TOML run configuration with dotted
//! overrides, campaign execution (train, eval, sweep), append-only metric
//! files, run manifests and plot-data export.

pub mod config;
pub mod error;
pub mod export;
pub mod manifest;
pub mod metrics;
pub mod run;

pub use config::{load_config, parse_config, Mode, RunConfig};
pub use error::{HarnessError, Result};
pub use manifest::Manifest;
pub use run::run;
