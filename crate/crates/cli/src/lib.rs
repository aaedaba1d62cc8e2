//! Command-line front end for the cislunar relay simulator: scenario files,
//! CSV rendering and the batch commands.

pub mod commands;
pub mod error;
pub mod scenario_file;
pub mod table;

pub use error::{CliError, ScenarioError};
pub use scenario_file::{dump_scenario, parse_scenario, parse_scenario_str, LoadedScenario};
