//! Scenario runner and acceptance driver for the `landau` toolkit.

pub mod acceptance;
pub mod artifacts;
pub mod config;
pub mod scenarios;
