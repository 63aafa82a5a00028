//! Config-driven experiment runner for the `summability` toolkit.

pub mod catalog;
pub mod config;
pub mod expr;
pub mod plot;
pub mod runner;

pub use catalog::{list_builtins, Catalog};
pub use runner::{run_config, RunManifest, RunOptions};
