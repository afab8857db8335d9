//! Experiment orchestration for the SBS optimizers: repeated seeded runs over
//! a grid of methods and benchmark functions, distance statistics, empirical
//! competitive ratios and average ranks, result files, trajectory logs and
//! their SVG rendering.

pub mod config;
pub mod diag;
mod error;
pub mod experiment;
pub mod metrics;
pub mod plot;
pub mod seed;
pub mod trajectory;

pub use config::{ExperimentConfig, FunctionSpec};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, write_results, Cell, ExperimentTable, MethodSummary, RunRecord};
