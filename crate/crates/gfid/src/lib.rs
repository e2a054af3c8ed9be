//! Batch experiments for blind graph-filter identification: scenario files,
//! a deterministic parallel runner, CSV output and quick SVG plots.

pub mod config;
pub mod constrained;
pub mod output;
pub mod plot;
pub mod presets;
pub mod runner;

pub use config::{ConfigError, ScenarioConfig};
pub use runner::{run_scenario, ResultRow, RunOptions};
