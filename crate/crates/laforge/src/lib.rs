//! Scenario files, JSON reports and the subcommands of the `laforge` tool.

pub mod commands;
pub mod json;
pub mod runner;
pub mod scenario;
