//! Experiment runner for the articulated-pattern benchmark: repeated
//! inference trials (`run`), the runtime scaling sweep (`bench`) and scene
//! generation (`scene`).

pub mod config;
pub mod error;
pub mod experiment;
pub mod frames;
pub mod scaling;
pub mod scene_cmd;

pub use config::{Algorithm, ExperimentConfig, Overrides};
pub use error::{ConfigError, RunError};
pub use experiment::{run_experiment, RunReport};
pub use scaling::{run_scaling_benchmark, BenchRow};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/experiments.md")]
mod book_experiments {}
