//! Experiment driver behind the command-line tool: configuration, the five
//! commands, and their JSON/CSV reports.

pub mod commands;
pub mod config;
pub mod report;

pub use commands::{cmd_certify, cmd_lambda_sweep, cmd_loss_range, cmd_oracle_check, cmd_params, Overrides};
pub use config::ExperimentConfig;
pub use report::{OutputFormat, RunReport, Stats, Table, Value};
