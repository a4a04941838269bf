//! Running experiments: seeds, model reuse, per-cell evaluation, aggregation.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use masc_core::data::LabeledDataset;
use masc_core::masc::{classify_batch, evaluate, MetricKind};
use masc_core::model::{accuracy, init_model, train_with, MlpConfig, MlpModel, TrainTrace};
use masc_core::rng::mix_seed;
use masc_core::subspace::{component_counts, estimate_bank, BankParams, BankProvenance, LabelSource};
use masc_core::DenseMatrix;

use super::config::{ExperimentConfig, ExperimentKind};
use super::data::{prepare_dataset, PreparedData};
use super::report::{
    mean_components, model_means, write_reports, LayerReport, MetricSummary, ReportFormat, RunInfo, RunMetric,
    Spread,
};
use crate::io::bank::save_bank;
use crate::io::checkpoint::{load_model, save_model};
use crate::io::manifest::DatasetManifest;
use crate::io::tables::{read_trace_csv, write_component_counts_csv, write_prediction_dump, write_trace_csv};
use crate::io::file_id;
use crate::{Error, Result};

/// A model together with its training history and where it is stored.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    /// The network.
    pub model: MlpModel,
    /// Per-epoch history (empty for untrained models).
    pub trace: TrainTrace,
    /// Checkpoint path relative to the output directory.
    pub checkpoint: String,
    /// Manifest of the data it was trained on, relative to the output directory.
    pub manifest: String,
}

/// `p` in thousandths, used in directory names and seeds.
pub fn permille(p: f64) -> u64 {
    (p * 1000.0).round() as u64
}

/// Report name of a layer.
pub fn layer_name(model: &MlpModel, layer: usize) -> String {
    if layer == 0 {
        "input".to_string()
    } else {
        format!("fc{layer}({})", model.layer_width(layer).unwrap_or(0))
    }
}

fn rel(path: &Path) -> String {
    path.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Prepared data plus the seed and path conventions shared by every
/// experiment writing into one output directory.
///
/// Seeds: run `r` gets `mix_seed(master, r)`, which initialises its models;
/// the cell `(r, p)` gets `mix_seed(run seed, permille(p))`, which drives
/// label corruption and mini-batch order. Models live at
/// `runs/run<r>/p<pppp>/model.ckpt` and are shared between experiment kinds.
pub struct Harness {
    config: ExperimentConfig,
    data: PreparedData,
    out: PathBuf,
}

impl Harness {
    /// Loads the dataset and writes its manifest under `dataset/`.
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let data = prepare_dataset(&config)?;
        let out = config.output_dir.clone();
        data.manifest.save(&out.join("dataset/manifest.json"))?;
        Ok(Self { config, data, out })
    }

    /// The configuration.
    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    /// Training and test data.
    pub fn data(&self) -> &PreparedData {
        &self.data
    }

    /// Output directory.
    pub fn output_dir(&self) -> &Path {
        &self.out
    }

    /// Seed of run `run`.
    pub fn run_seed(&self, run: usize) -> u64 {
        mix_seed(self.config.master_seed, run as u64)
    }

    /// Seed of the cell `(run, p)`.
    pub fn cell_seed(&self, run: usize, p: f64) -> u64 {
        mix_seed(self.run_seed(run), permille(p))
    }

    /// Cell directory relative to the output directory.
    pub fn cell_dir(&self, run: usize, p: f64) -> PathBuf {
        PathBuf::from(format!("runs/run{run}/p{:04}", permille(p)))
    }

    /// Network configuration of run `run`.
    pub fn model_config(&self, run: usize) -> Result<MlpConfig> {
        self.config
            .model_config(self.data.train.num_features(), self.data.train.num_classes(), self.run_seed(run))
    }

    /// Training set of the cell with its labels corrupted.
    pub fn cell_data(&self, run: usize, p: f64) -> Result<(LabeledDataset, DatasetManifest)> {
        self.data.corrupted(p, self.cell_seed(run, p))
    }

    /// Trains the model of cell `(run, p)`, or loads it when a checkpoint
    /// trained under the same configuration and data is already on disk.
    pub fn obtain_model(&self, run: usize, p: f64) -> Result<TrainedModel> {
        let dir = self.cell_dir(run, p);
        let (train, manifest) = self.cell_data(run, p)?;
        let config = self.model_config(run)?;
        let ckpt = dir.join("model.ckpt");
        let trace_path = dir.join("trace.csv");
        let manifest_path = dir.join("manifest.json");
        let done = TrainedModel {
            model: init_model(&config)?,
            trace: TrainTrace::default(),
            checkpoint: rel(&ckpt),
            manifest: rel(&manifest_path),
        };
        if self.config.reuse_checkpoints {
            if let Some((model, trace)) = self.try_reuse(&ckpt, &trace_path, &manifest_path, &config, &manifest) {
                log::info!("run {run}, p = {p}: reusing {}", done.checkpoint);
                return Ok(TrainedModel { model, trace, ..done });
            }
        }
        let mut model = done.model.clone();
        let trace = train_with(&mut model, &train, &self.data.test, self.cell_seed(run, p), |r| {
            log::info!(
                "run {run}, p = {p}: epoch {} loss {:.4} train {:.4} test {:.4}",
                r.epoch,
                r.loss,
                r.train_accuracy,
                r.test_accuracy
            );
        })
        .map_err(|source| Error::Training { p, run, source })?;
        manifest.save(&self.out.join(&manifest_path))?;
        write_trace_csv(&self.out.join(&trace_path), &trace)?;
        save_model(&self.out.join(&ckpt), &model)?;
        Ok(TrainedModel { model, trace, ..done })
    }

    fn try_reuse(
        &self,
        ckpt: &Path,
        trace: &Path,
        manifest: &Path,
        config: &MlpConfig,
        expected: &DatasetManifest,
    ) -> Option<(MlpModel, TrainTrace)> {
        let model = load_model(&self.out.join(ckpt)).ok()?;
        let stored = DatasetManifest::load(&self.out.join(manifest)).ok()?;
        if model.config() != config || &stored != expected {
            return None;
        }
        let trace = read_trace_csv(&self.out.join(trace)).ok()?;
        Some((model, trace))
    }

    /// The untrained model of run `run`, saved under `runs/run<r>/init/`.
    pub fn untrained_model(&self, run: usize) -> Result<TrainedModel> {
        let model = init_model(&self.model_config(run)?)?;
        let ckpt = PathBuf::from(format!("runs/run{run}/init/model.ckpt"));
        save_model(&self.out.join(&ckpt), &model)?;
        Ok(TrainedModel {
            model,
            trace: TrainTrace::default(),
            checkpoint: rel(&ckpt),
            manifest: String::new(),
        })
    }

    /// Layers probed for `model`.
    pub fn layers(&self, model: &MlpModel) -> Result<Vec<usize>> {
        self.config.probe_layers(model.num_hidden_layers())
    }

    /// Runs the configured experiment and writes `report.csv`, `runs.csv`
    /// and `report.json` under `<output>/<experiment kind>/`.
    pub fn run(&self) -> Result<Vec<LayerReport>> {
        let kind = self.config.experiment_kind;
        let reports = match kind {
            ExperimentKind::CorruptedSubspaces => self.cell_experiment(kind, &[LabelSource::Corrupted], false)?,
            ExperimentKind::TrueLabelSubspaces => {
                self.cell_experiment(kind, &[LabelSource::True, LabelSource::Corrupted], false)?
            }
            ExperimentKind::RandomInitControl => {
                self.cell_experiment(kind, &[LabelSource::True, LabelSource::Corrupted], true)?
            }
            ExperimentKind::InducedMemorization => self.induced_experiment()?,
        };
        for r in &reports {
            r.check()?;
        }
        let dir = self.out.join(kind.as_str());
        write_reports(&dir, &reports, ReportFormat::Csv)?;
        write_reports(&dir, &reports, ReportFormat::Json)?;
        Ok(reports)
    }

    fn cells(&self) -> Vec<(usize, f64)> {
        let degrees = &self.config.corruption_degrees;
        (0..self.config.num_runs)
            .flat_map(|run| degrees.iter().map(move |&p| (run, p)))
            .collect()
    }

    fn cell_experiment(&self, kind: ExperimentKind, sources: &[LabelSource], control: bool) -> Result<Vec<LayerReport>> {
        let cells = self.cells();
        let results = run_jobs(cells.len(), self.config.workers, |i| {
            let (run, p) = cells[i];
            let (train, manifest) = self.cell_data(run, p)?;
            let model = if control {
                let mut m = self.untrained_model(run)?;
                let path = self.cell_dir(run, p).join(kind.as_str()).join("manifest.json");
                manifest.save(&self.out.join(&path))?;
                m.manifest = rel(&path);
                m
            } else {
                self.obtain_model(run, p)?
            };
            let info = self.run_info(run, &model, &train)?;
            if control {
                self.chance_check(run, p, &info)?;
            }
            self.evaluate_cell(kind, run, p, &model, &train, sources, &metrics_for(kind), info)
        })?;
        Ok(self.aggregate(kind, control, results))
    }

    fn induced_experiment(&self) -> Result<Vec<LayerReport>> {
        let kind = ExperimentKind::InducedMemorization;
        let runs = self.config.num_runs;
        let per_run = run_jobs(runs, self.config.workers, |run| {
            let model = self.obtain_model(run, 0.0)?;
            let mut out = Vec::new();
            for &p in &self.config.corruption_degrees {
                let (train, manifest) = self.cell_data(run, p)?;
                let path = self.cell_dir(run, p).join(kind.as_str()).join("manifest.json");
                manifest.save(&self.out.join(&path))?;
                let info = RunInfo {
                    manifest: rel(&path),
                    ..self.run_info(run, &model, &train)?
                };
                out.push(self.evaluate_cell(
                    kind,
                    run,
                    p,
                    &model,
                    &train,
                    &[LabelSource::Corrupted],
                    &metrics_for(kind),
                    info,
                )?);
            }
            Ok(out)
        })?;
        // Reorder run-major results into the cell order of the other kinds.
        let degrees = self.config.corruption_degrees.len();
        let mut flat: Vec<Option<CellResult>> = per_run.into_iter().flatten().map(Some).collect();
        let results = (0..runs * degrees).map(|i| flat[i].take().expect("each cell once")).collect();
        Ok(self.aggregate(kind, false, results))
    }

    fn run_info(&self, run: usize, model: &TrainedModel, train: &LabeledDataset) -> Result<RunInfo> {
        let train_acc = accuracy(&model.model.predict(train.inputs())?, train.corrupted_labels());
        let test_acc = accuracy(&model.model.predict(self.data.test.inputs())?, self.data.test.true_labels());
        let best = if model.trace.epochs.is_empty() {
            test_acc
        } else {
            model.trace.best_test_accuracy
        };
        Ok(RunInfo {
            seed: self.run_seed(run),
            model_train_accuracy: train_acc,
            model_test_accuracy: test_acc,
            best_test_accuracy: best,
            manifest: model.manifest.clone(),
            checkpoint: model.checkpoint.clone(),
        })
    }

    /// Fails unless both accuracies of an untrained model lie within three
    /// binomial standard deviations of `1/c`.
    fn chance_check(&self, run: usize, p: f64, info: &RunInfo) -> Result<()> {
        let c = self.data.train.num_classes() as f64;
        let q = 1.0 / c;
        for (what, acc, n) in [
            ("train", info.model_train_accuracy, self.data.train.len()),
            ("test", info.model_test_accuracy, self.data.test.len()),
        ] {
            let band = 3.0 * (q * (1.0 - q) / n as f64).sqrt();
            if (acc - q).abs() > band {
                return Err(Error::Control(format!(
                    "run {run}, p = {p}: untrained {what} accuracy {acc:.4} outside {q:.4} ± {band:.4}"
                )));
            }
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn evaluate_cell(
        &self,
        kind: ExperimentKind,
        run: usize,
        p: f64,
        model: &TrainedModel,
        train: &LabeledDataset,
        sources: &[LabelSource],
        metrics: &[(LabelSource, MetricKind)],
        info: RunInfo,
    ) -> Result<CellResult> {
        let net = &model.model;
        let test = &self.data.test;
        let c = train.num_classes();
        let base = self.cell_dir(run, p).join(kind.as_str());
        let provenance = BankProvenance {
            model_checkpoint: Some(file_id(&self.out.join(&model.checkpoint))?),
            dataset_manifest: Some(file_id(&self.out.join(&info.manifest))?),
        };
        let layers = self.layers(net)?;
        let mut entries = Vec::new();
        let mut counts = vec![Vec::new(); sources.len() * self.config.variance_thresholds.len()];
        for &layer in &layers {
            let train_x = net.activations(train.inputs(), layer)?;
            let test_x = net.activations(test.inputs(), layer)?;
            for (ti, &threshold) in self.config.variance_thresholds.iter().enumerate() {
                let mut found = Vec::new();
                for (si, &source) in sources.iter().enumerate() {
                    let labels = match source {
                        LabelSource::Corrupted => train.corrupted_labels(),
                        LabelSource::True => train.true_labels(),
                    };
                    let params = BankParams {
                        num_classes: c,
                        variance_threshold: threshold,
                        layer_index: layer,
                        label_source: source,
                    };
                    let mut bank = estimate_bank(&train_x, labels, &params)?;
                    bank.provenance = provenance.clone();
                    let stem = format!("layer{layer}_{}_t{threshold}", source.as_str());
                    let bank_path = base.join("banks").join(format!("{stem}.bank"));
                    save_bank(&self.out.join(&bank_path), &bank)?;
                    let cc = component_counts(&bank);
                    for &(_, metric) in metrics.iter().filter(|(s, _)| *s == source) {
                        let (x, reference): (&DenseMatrix, &[usize]) = match metric {
                            MetricKind::MascCorruptedTrain => (&train_x, train.corrupted_labels()),
                            MetricKind::MascOriginalTrain => (&train_x, train.true_labels()),
                            MetricKind::MascTest => (&test_x, test.true_labels()),
                        };
                        let result = evaluate(x, reference, &bank, metric)?;
                        found.push((
                            source,
                            metric,
                            RunMetric {
                                accuracy: result.accuracy,
                                components: cc.per_class.clone(),
                                bank: rel(&bank_path),
                            },
                        ));
                    }
                    if self.config.write_predictions {
                        let preds = classify_batch(&test_x, &bank)?;
                        let path = base.join("predictions").join(format!("{stem}.csv"));
                        write_prediction_dump(&self.out.join(path), &preds, test.true_labels())?;
                    }
                    counts[ti * sources.len() + si].push(cc);
                }
                entries.push(LayerEntry {
                    threshold,
                    layer,
                    layer_name: layer_name(net, layer),
                    metrics: found,
                });
            }
        }
        for (ti, &threshold) in self.config.variance_thresholds.iter().enumerate() {
            for (si, source) in sources.iter().enumerate() {
                let path = base.join(format!("component_counts_{}_t{threshold}.csv", source.as_str()));
                write_component_counts_csv(&self.out.join(path), &counts[ti * sources.len() + si])?;
            }
        }
        log::info!("{} run {run}, p = {p}: {} layers scored", kind.as_str(), layers.len());
        Ok(CellResult { info, entries })
    }

    /// Folds cell results (run-major, degrees in config order) into one
    /// report per (p, threshold, layer).
    fn aggregate(&self, kind: ExperimentKind, control: bool, results: Vec<CellResult>) -> Vec<LayerReport> {
        let degrees = &self.config.corruption_degrees;
        let runs = self.config.num_runs;
        let mut reports = Vec::new();
        for (pi, &p) in degrees.iter().enumerate() {
            let cells: Vec<&CellResult> = (0..runs).map(|r| &results[r * degrees.len() + pi]).collect();
            let infos: Vec<RunInfo> = cells.iter().map(|c| c.info.clone()).collect();
            let (train_acc, test_acc, best) = model_means(&infos);
            for (ei, entry) in cells[0].entries.iter().enumerate() {
                let metrics = entry
                    .metrics
                    .iter()
                    .enumerate()
                    .map(|(mi, (source, metric, _))| {
                        let per_run: Vec<RunMetric> =
                            cells.iter().map(|c| c.entries[ei].metrics[mi].2.clone()).collect();
                        let values: Vec<f64> = per_run.iter().map(|r| r.accuracy).collect();
                        MetricSummary {
                            label_source: *source,
                            metric_kind: *metric,
                            accuracy: Spread::of(&values),
                            mean_components: mean_components(&per_run),
                            runs: per_run,
                        }
                    })
                    .collect();
                reports.push(LayerReport {
                    experiment_kind: kind,
                    dataset: self.data.manifest.name.clone(),
                    p,
                    variance_threshold: entry.threshold,
                    layer_index: entry.layer,
                    layer_name: entry.layer_name.clone(),
                    control,
                    model_train_accuracy: train_acc,
                    model_test_accuracy: test_acc,
                    best_test_accuracy: best,
                    metrics,
                    runs: infos.clone(),
                });
            }
        }
        reports.sort_by(|a, b| {
            let pa = degrees.iter().position(|&d| d == a.p);
            let pb = degrees.iter().position(|&d| d == b.p);
            pa.cmp(&pb)
                .then(a.variance_threshold.total_cmp(&b.variance_threshold))
                .then(a.layer_index.cmp(&b.layer_index))
        });
        reports
    }
}

struct LayerEntry {
    threshold: f64,
    layer: usize,
    layer_name: String,
    metrics: Vec<(LabelSource, MetricKind, RunMetric)>,
}

struct CellResult {
    info: RunInfo,
    entries: Vec<LayerEntry>,
}

fn metrics_for(kind: ExperimentKind) -> Vec<(LabelSource, MetricKind)> {
    use LabelSource::{Corrupted, True};
    use MetricKind::{MascCorruptedTrain, MascOriginalTrain, MascTest};
    match kind {
        ExperimentKind::CorruptedSubspaces => {
            vec![(Corrupted, MascCorruptedTrain), (Corrupted, MascOriginalTrain), (Corrupted, MascTest)]
        }
        ExperimentKind::TrueLabelSubspaces | ExperimentKind::RandomInitControl => vec![
            (True, MascOriginalTrain),
            (True, MascTest),
            (Corrupted, MascCorruptedTrain),
            (Corrupted, MascOriginalTrain),
            (Corrupted, MascTest),
        ],
        ExperimentKind::InducedMemorization => vec![(Corrupted, MascCorruptedTrain), (Corrupted, MascTest)],
    }
}

/// Runs `n` jobs on up to `workers` threads and returns their results in job
/// order; on failure, the error of the lowest failing job.
fn run_jobs<T: Send, F: Fn(usize) -> Result<T> + Sync>(n: usize, workers: usize, job: F) -> Result<Vec<T>> {
    if workers <= 1 || n <= 1 {
        return (0..n).map(job).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<T>>>> = (0..n).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..workers.min(n) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let r = job(i);
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("every job ran"))
        .collect()
}

/// Runs the corrupted-label subspace experiment.
pub fn run_corrupted_subspace_experiment(config: &ExperimentConfig) -> Result<Vec<LayerReport>> {
    run_kind(config, ExperimentKind::CorruptedSubspaces)
}

/// Runs the true-label subspace experiment (corrupted banks alongside).
pub fn run_true_label_subspace_experiment(config: &ExperimentConfig) -> Result<Vec<LayerReport>> {
    run_kind(config, ExperimentKind::TrueLabelSubspaces)
}

/// Runs the induced memorization experiment.
pub fn run_induced_memorization_experiment(config: &ExperimentConfig) -> Result<Vec<LayerReport>> {
    run_kind(config, ExperimentKind::InducedMemorization)
}

/// Runs the untrained-model control.
pub fn run_random_init_control(config: &ExperimentConfig) -> Result<Vec<LayerReport>> {
    run_kind(config, ExperimentKind::RandomInitControl)
}

/// Runs whatever `config.experiment_kind` names.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<LayerReport>> {
    Harness::new(config.clone())?.run()
}

fn run_kind(config: &ExperimentConfig, kind: ExperimentKind) -> Result<Vec<LayerReport>> {
    let mut config = config.clone();
    config.experiment_kind = kind;
    run_experiment(&config)
}
