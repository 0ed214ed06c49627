//! File formats, configuration parsing and the `oddsol` command-line tool.

pub mod commands;
pub mod config;
pub mod io;
pub mod record;

pub use config::{parse_problem, ConfigError, ProblemConfig};
