//! Scenario files, orchestration and file formats for the `cloak` binary.

pub mod config;
pub mod error;
pub mod io;
pub mod run;

pub use config::ScenarioConfig;
pub use error::{CliError, Result};
pub use run::{run_scenario, run_sweep, run_sweep_to_dir, CloakRecord, RunSummary};
