//! Command-line front end for `kneser-core`.

pub mod app;
pub mod parse;

pub use app::{dispatch, run, Cli, Command, Report, EXIT_PASS, EXIT_USAGE, EXIT_VIOLATION};
pub use parse::{parse_group, parse_set, render_element, render_set};
