//! Experiment pipeline: dataset generation, training, evaluation, baselines
//! and the figure-feed report, all driven by a [`RunConfig`].

pub mod commands;
pub mod config;
pub mod dataset;
pub mod export;
pub mod report;

pub use commands::{cmd_baseline, cmd_eval, cmd_train, run_baselines, BaselineResult};
pub use config::{BaselineSpec, DatasetSpec, EvalSpec, RunConfig};
pub use dataset::{cmd_gen_data, generate_dataset, load_split, Manifest};
pub use report::{cmd_report, ReportInputs};
