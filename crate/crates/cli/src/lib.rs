//! Command-line front end for `bellforge-core`: JSON and CSV formats,
//! rayon-parallel drivers and the `bellforge` subcommands.

pub mod cli;
pub mod error;
pub mod formats;
pub mod parallel;
pub mod sweep;

pub use error::{CliError, CliResult};

pub const TOOL: &str = "bellforge";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
