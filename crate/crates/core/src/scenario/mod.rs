//! Scenario files, the simulation loop and run logs.

pub mod config;
pub mod log;
pub mod run;

pub use config::ScenarioConfig;
pub use log::{compare, Comparison, RunLog};
pub use run::{run_from, run_scenario, Mode, RunOutcome, Termination};
