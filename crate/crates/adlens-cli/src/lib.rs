//! Library surface of the CLI: command implementations, config handling,
//! and the report schema (importable by integration tests and other tools).

pub mod commands;
pub mod config;
pub mod report;
