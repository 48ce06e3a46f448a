//! Configuration, output formats and subcommands behind the `halfline-nls` binary.

pub mod commands;
pub mod config;
pub mod output;
