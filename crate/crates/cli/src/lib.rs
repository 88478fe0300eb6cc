//! Command-line front end of the RSS key-generation simulator: sweep
//! configuration, orchestration, CSV persistence and SVG figures.

pub mod config;
mod error;
pub mod figures;
pub mod svg;
pub mod sweep;

pub use error::{CliError, Result};
