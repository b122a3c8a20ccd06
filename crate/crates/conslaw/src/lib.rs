//! Experiment driver for learning conservation laws from quantum dynamics.
//!
//! A JSON [`config::ExperimentConfig`] describes the model, time grid,
//! basis, noise and thresholds; [`pipeline::run_experiment`] runs it and
//! writes CSV, JSON and SVG artifacts with a SHA-256 manifest.

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod pipeline;
pub mod plots;

pub use config::{parse_config, ExperimentConfig};
pub use error::{RunError, RunResult, Stage};
pub use pipeline::{run_experiment, Mode, RunReport};
