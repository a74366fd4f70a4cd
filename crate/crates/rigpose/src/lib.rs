//! File formats and command line for rig relative-pose estimation.

pub mod cli;
pub mod error;
pub mod io;

pub use error::CliError;
