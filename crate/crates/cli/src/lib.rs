//! Command-line driver for the `halfint` library: the central-value sweep,
//! invariant suites and per-module pass-through commands.

pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
pub mod scan;
pub mod util;
pub mod verify;
