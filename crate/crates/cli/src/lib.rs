//! Command-line front end for `kirchhoff-core`: run configuration, CSV and
//! JSON artifacts, parallel sweeps and the nonexistence scan.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod report;
pub mod scan;

pub use commands::{run, RunOutcome};
pub use config::{CommandKind, RunConfig};
pub use error::{Error, Result};
