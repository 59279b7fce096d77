//! Command-line front end for `weylcap-core`: JSON channel specs in, JSON reports out.
//!
//! Exit codes: 0 success, 2 parse or usage error, 3 invalid channel spec,
//! 4 no capacity formula applies, 5 resource guard, 6 inequality margin violated.

pub mod cli;
pub mod commands;
pub mod error;
pub mod report;
pub mod spec_file;

pub use cli::Cli;
pub use commands::{run, Outcome};
pub use error::CliError;
