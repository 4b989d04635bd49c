//! Experiment front-end for the difficulty-aware GRPO core: configuration
//! files, on-disk formats (task banks, metrics, checkpoints, histograms) and
//! the `dgrpo` command implementations.

pub mod bank_format;
pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod error;
pub mod histogram;
pub mod metrics;

pub use error::{CliError, Result};
