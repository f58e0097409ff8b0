//! Configuration, parallel experiments, condition checks and output files.

pub mod checks;
pub mod config;
pub mod experiment;
pub mod output;

pub use checks::{run_condition_checks, CheckEntry, ConditionReport, Status};
pub use config::{ExperimentConfig, LimitConfig, Model, ModelConfig};
pub use experiment::{
    moment_report, run_limit_sample, run_scaling_experiment, run_scaling_with, ExperimentResult,
    MomentReport, ReplicateRecord, ScalingRow,
};
pub use output::emit_outputs;
