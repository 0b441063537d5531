//! Command-line front end: scenario files, inference tables, phase fitting,
//! belief-space sweeps and their CSV / gnuplot exports.

pub mod error;
pub mod output;
pub mod scenario;

pub use error::{CliError, Result};
pub use scenario::{Phases, Scenario, ScenarioFile};
pub mod app;

pub use app::{run, Cli, Command};
