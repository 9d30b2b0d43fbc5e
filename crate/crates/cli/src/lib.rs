//! Experiment harness for equiboot: the odds-ratio simulation study, the
//! blind vs equity dataset pipeline, and their report files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod pipeline;
pub mod report;
pub mod simulate;

pub use config::ExperimentConfig;
pub use error::HarnessError;
pub use pipeline::{run_dataset_pipeline, ModelKind, PipelineReport, Regime};
pub use simulate::{run_simulation, Statistic, Table4Report};
