//! Batch driver for `qfi-core`: configuration, grid evaluation and CSV/JSON
//! tables. The `qfi` binary is a thin wrapper around [`cli::execute`].

pub mod cli;
pub mod commands;
pub mod config;
mod error;
pub mod table;

pub use error::CliError;
