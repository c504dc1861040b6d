//! Library side of the `epiforecast` command-line tool.

pub mod config;
pub mod error;
pub mod eval;
pub mod fetch;
pub mod forecast;
pub mod risktree;
pub mod svg;

pub use error::{CliError, Result};
