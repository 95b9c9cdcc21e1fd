//! Standard-library side of the self-adapting menu engine: a file-backed
//! store, wall clocks, config and log files, and the `adapt`, `replay`,
//! `matrix` and `bench` commands.

pub mod commands;
pub mod config;
pub mod error;
pub mod logfile;
pub mod store;
pub mod synth;

pub use commands::{adapt, bench, matrix, replay, BenchOptions, Inputs};
pub use config::ConfigFile;
pub use error::CliError;
pub use store::{write_atomic, FileStore, RunClock, SystemClock};

pub use menuadapt_core as core;

/// Stylesheet for the marker tokens added by the adaptation styles.
pub const STYLESHEET: &str = include_str!("../sam.css");
