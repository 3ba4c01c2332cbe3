//! Experiment harness: configuration, drivers, deterministic output and recipes.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod recipes;

pub use config::{Command, ExperimentConfig, FgrMethod, ModelKind, Recipe};
pub use error::{HarnessError, Result};
pub use experiments::run;
