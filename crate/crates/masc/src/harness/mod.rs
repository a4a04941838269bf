//! Experiment orchestration: configuration, data preparation, the four
//! experiment families and their reports.
//!
//! Everything an experiment produces lands under its output directory:
//!
//! ```text
//! dataset/manifest.json                       base dataset
//! runs/run<r>/p<pppp>/model.ckpt, trace.csv   trained model of a cell
//! runs/run<r>/p<pppp>/manifest.json           its corrupted training set
//! runs/run<r>/p<pppp>/<kind>/banks/*.bank     subspace banks
//! runs/run<r>/init/model.ckpt                 untrained control model
//! <kind>/report.csv, runs.csv, report.json    results
//! ```

pub mod config;
pub mod data;
pub mod report;
pub mod runner;

pub use config::{DatasetSpec, ExperimentConfig, ExperimentKind, ModelOverrides, Profile};
pub use data::{prepare_dataset, PreparedData};
pub use report::{LayerReport, MetricSummary, ReportFormat, RunInfo, RunMetric, Spread};
pub use runner::{
    run_corrupted_subspace_experiment, run_experiment, run_induced_memorization_experiment,
    run_random_init_control, run_true_label_subspace_experiment, Harness, TrainedModel,
};
