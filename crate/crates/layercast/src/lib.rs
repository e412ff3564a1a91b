//! Command-line front end and file formats for `layercast-core`.
//!
//! The binary exposes four subcommands (`solve`, `sweep`, `power-dist`,
//! `compare`) that write CSV or JSON tables. Every run carries a
//! [`manifest::RunManifest`] recording the resolved configuration, grid
//! sizes, tolerances and random seed, so a rerun with the same arguments
//! reproduces the output byte for byte.

pub mod args;
pub mod commands;
pub mod error;
pub mod manifest;
pub mod parallel;
pub mod states_file;
pub mod table;

pub use args::Cli;
pub use commands::{run, Outcome};
pub use error::{CliError, EXIT_TOLERANCE_BREACH};
