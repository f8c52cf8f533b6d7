//! Config schema, dataset writers, and the scenario runner behind the
//! `clgrid` command-line tool. Kept as a library so the parsing and decoding
//! entry points can be exercised directly (tests, fuzzing).

pub mod config;
pub mod gridio;
pub mod runner;

pub use config::{ConfigError, Scenario};
pub use runner::{run, RunError, RunFlags, RunSummary};
