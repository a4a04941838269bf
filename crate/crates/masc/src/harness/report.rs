//! Aggregated results and their CSV and JSON forms.

use std::path::Path;

use masc_core::masc::MetricKind;
use masc_core::subspace::LabelSource;
use serde::{Deserialize, Serialize};

use super::config::ExperimentKind;
use crate::io::{read_bytes, read_json, write_bytes, write_json};
use crate::{Error, Result};

/// Header of `report.csv`, in order.
pub const REPORT_COLUMNS: [&str; 14] = [
    "experiment_kind",
    "dataset",
    "p",
    "variance_threshold",
    "layer_index",
    "layer_name",
    "metric_kind",
    "acc_mean",
    "acc_min",
    "acc_max",
    "model_train_acc",
    "model_test_acc",
    "best_test_acc",
    "mean_components",
];

/// Header of `runs.csv`, in order.
pub const RUN_COLUMNS: [&str; 16] = [
    "experiment_kind",
    "dataset",
    "p",
    "variance_threshold",
    "layer_index",
    "metric_kind",
    "run",
    "seed",
    "accuracy",
    "model_train_acc",
    "model_test_acc",
    "best_test_acc",
    "mean_components",
    "manifest",
    "checkpoint",
    "bank",
];

/// Minimum, mean and maximum of per-run values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    /// Smallest value.
    pub min: f64,
    /// Arithmetic mean.
    pub mean: f64,
    /// Largest value.
    pub max: f64,
}

impl Spread {
    /// Summarises a non-empty slice.
    pub fn of(values: &[f64]) -> Self {
        assert!(!values.is_empty(), "spread of nothing");
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // Guard against the mean drifting a rounding error outside [min, max].
        let mean = (values.iter().sum::<f64>() / values.len() as f64).clamp(min, max);
        Self { min, mean, max }
    }
}

/// What one run contributed to a metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetric {
    /// MASC accuracy.
    pub accuracy: f64,
    /// Component count of each class in the bank used.
    pub components: Vec<usize>,
    /// Bank file, relative to the output directory.
    pub bank: String,
}

/// One MASC accuracy of one layer, over all runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    /// Labels the bank was fitted on.
    pub label_source: LabelSource,
    /// What was scored.
    pub metric_kind: MetricKind,
    /// Accuracy spread over runs.
    pub accuracy: Spread,
    /// Mean component count over runs and classes.
    pub mean_components: f64,
    /// Per-run details, in run order.
    pub runs: Vec<RunMetric>,
}

impl MetricSummary {
    /// `"<label source>.<metric>"`, the `metric_kind` column of `report.csv`.
    pub fn column_name(&self) -> String {
        format!("{}.{}", self.label_source.as_str(), self.metric_kind.as_str())
    }
}

/// Model-level numbers of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    /// Seed of the run.
    pub seed: u64,
    /// Accuracy on the training inputs against the labels of this cell.
    pub model_train_accuracy: f64,
    /// Accuracy on the test inputs against the true labels.
    pub model_test_accuracy: f64,
    /// Best per-epoch test accuracy while training (early-stopping baseline).
    pub best_test_accuracy: f64,
    /// Dataset manifest, relative to the output directory.
    pub manifest: String,
    /// Model checkpoint, relative to the output directory.
    pub checkpoint: String,
}

/// Every MASC accuracy of one layer at one corruption degree and threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerReport {
    /// Experiment family.
    pub experiment_kind: ExperimentKind,
    /// Dataset name.
    pub dataset: String,
    /// Corruption degree.
    pub p: f64,
    /// Variance threshold of the banks.
    pub variance_threshold: f64,
    /// Layer index (0 is the input).
    pub layer_index: usize,
    /// `input`, or `fc<i>(<width>)`.
    pub layer_name: String,
    /// Set for untrained-model controls.
    pub control: bool,
    /// Mean over runs of [`RunInfo::model_train_accuracy`].
    pub model_train_accuracy: f64,
    /// Mean over runs of [`RunInfo::model_test_accuracy`].
    pub model_test_accuracy: f64,
    /// Mean over runs of [`RunInfo::best_test_accuracy`].
    pub best_test_accuracy: f64,
    /// MASC accuracies.
    pub metrics: Vec<MetricSummary>,
    /// Per-run model numbers, in run order.
    pub runs: Vec<RunInfo>,
}

impl LayerReport {
    /// The summary for a label source and metric, if present.
    pub fn metric(&self, source: LabelSource, kind: MetricKind) -> Option<&MetricSummary> {
        self.metrics
            .iter()
            .find(|m| m.label_source == source && m.metric_kind == kind)
    }

    /// Checks the aggregation invariants: accuracies in `[0, 1]`, means
    /// within `[min, max]` and matching the per-run values.
    pub fn check(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("layer {} at p = {}: {what}", self.layer_index, self.p)));
        for m in &self.metrics {
            let a = m.accuracy;
            if !(0.0 <= a.min && a.min <= a.mean && a.mean <= a.max && a.max <= 1.0) {
                return bad("accuracy spread out of order or range");
            }
            if m.runs.len() != self.runs.len() {
                return bad("metric run count differs from the model run count");
            }
            let values: Vec<f64> = m.runs.iter().map(|r| r.accuracy).collect();
            if Spread::of(&values) != a {
                return bad("accuracy spread does not match the runs");
            }
        }
        Ok(())
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n.max(1) as f64
}

pub(crate) fn model_means(runs: &[RunInfo]) -> (f64, f64, f64) {
    (
        mean(runs.iter().map(|r| r.model_train_accuracy)),
        mean(runs.iter().map(|r| r.model_test_accuracy)),
        mean(runs.iter().map(|r| r.best_test_accuracy)),
    )
}

pub(crate) fn mean_components(runs: &[RunMetric]) -> f64 {
    mean(runs.iter().flat_map(|r| r.components.iter().map(|&k| k as f64)))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::format(path, e.position().map_or(0, |p| p.byte() as usize), e.to_string())
}

fn write_table(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    write_bytes(path, &bytes)
}

/// Writes one row per (layer report, metric) with the [`REPORT_COLUMNS`]
/// header. Floats use the shortest representation that round-trips.
pub fn write_report_csv(path: &Path, reports: &[LayerReport]) -> Result<()> {
    if reports.is_empty() {
        return Err(Error::Config("no reports to write".into()));
    }
    let rows = reports.iter().flat_map(|r| {
        r.metrics.iter().map(move |m| {
            vec![
                r.experiment_kind.as_str().to_string(),
                r.dataset.clone(),
                r.p.to_string(),
                r.variance_threshold.to_string(),
                r.layer_index.to_string(),
                r.layer_name.clone(),
                m.column_name(),
                m.accuracy.mean.to_string(),
                m.accuracy.min.to_string(),
                m.accuracy.max.to_string(),
                r.model_train_accuracy.to_string(),
                r.model_test_accuracy.to_string(),
                r.best_test_accuracy.to_string(),
                m.mean_components.to_string(),
            ]
        })
    });
    write_table(path, &REPORT_COLUMNS, rows)
}

/// Writes the per-run rows behind [`write_report_csv`], with the file each
/// number came from.
pub fn write_runs_csv(path: &Path, reports: &[LayerReport]) -> Result<()> {
    let rows = reports.iter().flat_map(|r| {
        r.metrics.iter().flat_map(move |m| {
            m.runs.iter().zip(&r.runs).enumerate().map(move |(i, (rm, info))| {
                vec![
                    r.experiment_kind.as_str().to_string(),
                    r.dataset.clone(),
                    r.p.to_string(),
                    r.variance_threshold.to_string(),
                    r.layer_index.to_string(),
                    m.column_name(),
                    i.to_string(),
                    info.seed.to_string(),
                    rm.accuracy.to_string(),
                    info.model_train_accuracy.to_string(),
                    info.model_test_accuracy.to_string(),
                    info.best_test_accuracy.to_string(),
                    mean(rm.components.iter().map(|&k| k as f64)).to_string(),
                    info.manifest.clone(),
                    info.checkpoint.clone(),
                    rm.bank.clone(),
                ]
            })
        })
    });
    write_table(path, &RUN_COLUMNS, rows)
}

/// Writes the reports as pretty JSON.
pub fn write_report_json(path: &Path, reports: &[LayerReport]) -> Result<()> {
    if reports.is_empty() {
        return Err(Error::Config("no reports to write".into()));
    }
    write_json(path, &reports)
}

/// Reads reports written by [`write_report_json`].
pub fn read_report_json(path: &Path) -> Result<Vec<LayerReport>> {
    read_json(path)
}

/// Output format of [`write_reports`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// `report.csv` and `runs.csv`.
    Csv,
    /// `report.json`.
    Json,
}

/// Writes the reports into `dir` in the given format.
pub fn write_reports(dir: &Path, reports: &[LayerReport], format: ReportFormat) -> Result<()> {
    match format {
        ReportFormat::Csv => {
            write_report_csv(&dir.join("report.csv"), reports)?;
            write_runs_csv(&dir.join("runs.csv"), reports)
        }
        ReportFormat::Json => write_report_json(&dir.join("report.json"), reports),
    }
}

/// Reads a CSV table into its header and rows of strings.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let bytes = read_bytes(path)?;
    let mut r = csv::Reader::from_reader(bytes.as_slice());
    let header = r.headers().map_err(|e| csv_err(path, e))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(|e| csv_err(path, e))?.iter().map(String::from).collect());
    }
    Ok((header, rows))
}
