//! Experiment orchestration, configuration, seeding, and report emission.

pub mod config;
pub mod experiments;
pub mod report;
pub mod seed;

pub use config::{DerivativeMode, ExperimentConfig};
pub use experiments::{
    prepare_trajectory, run_experiment1, run_experiment2, run_experiment3, Cell, Method,
    ResultTable,
};
pub use report::{emit_report, table_from_csv, table_to_csv, tables_to_markdown, ReportFormat};
