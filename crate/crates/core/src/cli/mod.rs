//! Batch front end: configuration files, check orchestration and JSON reports.

mod config;
mod report;
mod run;

pub use config::{parse_config, CheckConfig, CheckKind, ModelChoice, PullbackOptions, RawConfig, Sampler};
pub use report::{render, sort_cells, Cell, ConditionReport};
pub use run::{build, explain, run_check, run_sweep};
