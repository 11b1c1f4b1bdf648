//! Command-line front end: CSV ingestion, segmentation inspection, single
//! forecast explanations, dataset-scale perturbation analysis and SVG output.

pub mod commands;
pub mod csv_io;
pub mod docs;
pub mod error;
pub mod svg;

pub use commands::{run, Cli, Command};
pub use error::CliError;
