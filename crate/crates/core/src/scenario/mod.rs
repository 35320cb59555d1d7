//! Scenario runner: configuration, pipelines and reports behind the
//! command-line tool.

pub mod config;
pub mod report;
pub mod run;

pub use config::{ConfigFile, OutputFormat, ScenarioConfig, ScenarioKind};
pub use report::{emit, to_csv, to_json, write_atomic, Header, SCHEMA};
pub use run::{run, Outcome, Table};
