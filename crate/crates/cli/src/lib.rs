//! Command-line driver and annotation service.

pub mod cli;
pub mod commands;
pub mod error;
pub mod files;
pub mod server;
