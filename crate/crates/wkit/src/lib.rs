//! File formats, experiment configuration and the experiment runner behind
//! the `wkit` command line tool.

pub mod config;
pub mod error;
pub mod formats;
pub mod run;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{Result, WkitError};
pub use run::{run, Report, RunOutcome, Verdict};
