//! Experiment driver: configuration, seeded parallel trials, aggregation,
//! CSV/JSON output and the verification suites.

pub mod config;
pub mod output;
pub mod stats;
pub mod sweep;
pub mod trial;
pub mod verify;

pub use config::{BudgetSpec, DPolicy, ExperimentConfig, MPolicy, PointConfig, RegimeKind, SweepAxis, YPolicy};
pub use output::{emit_csv, emit_json, read_json, render_report, write_csv};
pub use stats::{fit_loglog_slope, pairwise_sum, SlopeFit, Summary};
pub use sweep::{run_scaling_experiment, PointSummary, ScalingReport, REPORT_SCHEMA};
pub use trial::{derive_seed, run_point, run_trial, TrialRecord, CSV_COLUMNS};
