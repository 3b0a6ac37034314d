//! File formats, configuration and the command runner around `dumbbell-core`.

pub mod config;
pub mod error;
pub mod format;
pub mod io;
pub mod manifest;
pub mod run;
pub mod svg;

pub use config::ExperimentConfig;
pub use error::{LabError, Result};
pub use run::{execute, run, Command};
