//! Experiment runner behind the command-line tool.

pub mod config;
pub mod run;
pub mod suites;
pub mod table;

pub use config::{ExperimentConfig, OutputFormat, Plan, Suite};
pub use run::{run, RunManifest};
pub use suites::{execute, Check, SuiteOutput};
pub use table::{Cell, Table};
