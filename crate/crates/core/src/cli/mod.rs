//! Configuration, experiment commands and artifact export for the command line tool.

pub mod commands;
pub mod config;
pub mod export;
