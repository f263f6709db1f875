//! Simulation harness for the `manifold-dp` mechanisms: sensitivity and
//! utility experiments, the tangent-bound scan, the projection check and
//! the circle example, with deterministic per-row seeding and CSV output.

pub mod circle;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod seed;

pub use config::{Experiment, ExperimentConfig, MechanismOverrides};
pub use error::{HarnessError, Result};
