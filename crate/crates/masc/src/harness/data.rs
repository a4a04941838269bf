//! Loading, subsetting and normalising datasets for experiments.

use std::path::Path;

use masc_core::data::{
    changed_fraction, corrupt_labels, generate_synthetic, split_holdout, stratified_indices, ChannelStats,
    LabeledDataset, Normalization,
};
use masc_core::DenseMatrix;

use super::config::{DatasetSpec, ExperimentConfig};
use crate::io::csv_data::load_csv;
use crate::io::idx::IdxPair;
use crate::io::manifest::{CorruptionRecord, DatasetManifest};
use crate::{Error, Result};

/// Standard MNIST file names.
pub const MNIST_FILES: [&str; 4] = [
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
];

/// Training and test sets ready for a model, with their manifest.
#[derive(Debug, Clone)]
pub struct PreparedData {
    /// Uncorrupted training set.
    pub train: LabeledDataset,
    /// Test set (its labels are never corrupted).
    pub test: LabeledDataset,
    /// Where it came from.
    pub manifest: DatasetManifest,
}

impl PreparedData {
    /// The training set with corrupted labels, and the manifest recording it.
    pub fn corrupted(&self, p: f64, seed: u64) -> Result<(LabeledDataset, DatasetManifest)> {
        let train = corrupt_labels(&self.train, p, seed)?;
        let manifest = DatasetManifest {
            corruption: Some(CorruptionRecord {
                p,
                seed,
                changed_fraction: changed_fraction(&train),
                parent: self.manifest.id(),
            }),
            ..self.manifest.clone()
        };
        Ok((train, manifest))
    }
}

/// Loads, subsets and normalises the configured dataset.
///
/// Standardisation statistics come from the training split alone. MNIST
/// subsets are balanced: `train_size / 10` and `test_size / 10` images per
/// class, drawn with the master seed.
pub fn prepare_dataset(config: &ExperimentConfig) -> Result<PreparedData> {
    let norm = config.normalization;
    let seed = config.master_seed;
    let (train, test, paths) = match &config.dataset {
        DatasetSpec::Mnist {
            dir,
            train_size,
            test_size,
        } => {
            let p: Vec<_> = MNIST_FILES.iter().map(|f| dir.join(f)).collect();
            let train_pair = IdxPair::read(&p[0], &p[1])?;
            let test_pair = IdxPair::read(&p[2], &p[3])?;
            let pick = |pair: &IdxPair, total: usize| -> Result<Vec<usize>> {
                let labels: Vec<usize> = pair.labels.iter().map(|&l| usize::from(l)).collect();
                let c = labels.iter().max().map_or(10, |&m| (m + 1).max(10));
                Ok(stratified_indices(&labels, c, total / c, seed)?)
            };
            // Pixels are scaled here; standardisation happens below, on raw values.
            let raw = if norm == Normalization::DivideBy255 {
                Normalization::DivideBy255
            } else {
                Normalization::None
            };
            let train = train_pair.to_dataset(Some(&pick(&train_pair, *train_size)?), raw)?;
            let test = test_pair.to_dataset(Some(&pick(&test_pair, *test_size)?), raw)?;
            (train, test, p)
        }
        DatasetSpec::Csv {
            train,
            test,
            has_header,
            num_classes,
        } => {
            let a = load_csv(train, *has_header, *num_classes)?;
            let b = load_csv(test, *has_header, *num_classes)?;
            let c = a.num_classes().max(b.num_classes());
            let (a, b) = (with_classes(a, c)?, with_classes(b, c)?);
            let (a, b) = if norm == Normalization::DivideBy255 {
                (scale(a, 1.0 / 255.0)?, scale(b, 1.0 / 255.0)?)
            } else {
                (a, b)
            };
            (a, b, vec![train.clone(), test.clone()])
        }
        DatasetSpec::Synthetic { spec, test_fraction } => {
            let all = generate_synthetic(spec)?;
            let (train, test) = split_holdout(&all, *test_fraction, seed)?;
            (train, test, Vec::new())
        }
    };
    if train.num_features() != test.num_features() {
        return Err(Error::Config(format!(
            "training inputs have {} features, test inputs {}",
            train.num_features(),
            test.num_features()
        )));
    }
    let (train, test) = if norm == Normalization::PerChannelStandardize {
        let stats = ChannelStats::fit(train.inputs(), 1)?;
        let standardise = |d: LabeledDataset| -> Result<LabeledDataset> {
            let mut x = d.inputs().clone();
            stats.apply(&mut x)?;
            Ok(d.with_inputs(x)?)
        };
        (standardise(train)?, standardise(test)?)
    } else {
        (train, test)
    };
    let manifest = DatasetManifest {
        name: config.dataset.name().to_string(),
        paths: paths.iter().map(|p| display(p)).collect(),
        normalization: norm,
        num_classes: train.num_classes(),
        num_features: train.num_features(),
        train_size: train.len(),
        test_size: test.len(),
        selection_seed: seed,
        corruption: None,
    };
    Ok(PreparedData { train, test, manifest })
}

fn display(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn with_classes(d: LabeledDataset, c: usize) -> Result<LabeledDataset> {
    if d.num_classes() == c {
        return Ok(d);
    }
    Ok(LabeledDataset::new(d.inputs().clone(), d.true_labels().to_vec(), c)?)
}

fn scale(d: LabeledDataset, factor: f64) -> Result<LabeledDataset> {
    let x = d.inputs();
    let values = x.as_slice().iter().map(|v| v * factor).collect();
    let x = DenseMatrix::from_vec(x.rows(), x.cols(), values)?;
    Ok(d.with_inputs(x)?)
}
