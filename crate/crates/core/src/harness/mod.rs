//! Experiment configs, episode orchestration, metrics and CSV logs.

mod config;
mod metrics;
mod run;

pub use config::*;
pub use metrics::{compute_metrics, percent_overshoot, settling_time, JointMetrics, MetricsContext, SETTLING_FRACTION};
pub use run::{
    build_plant, initial_actors, metrics_for, metrics_from_dir, read_joint_csv, read_metrics_csv, run_experiment,
    write_joint_csv, write_metrics_csv, write_outputs, CsvRow, RunOutput,
};
