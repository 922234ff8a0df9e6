//! Command-line front end: run configuration, the ray cache and one function
//! per subcommand.

pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
