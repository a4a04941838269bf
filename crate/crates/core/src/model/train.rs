use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::MlpModel;
use crate::data::LabeledDataset;
use crate::rng::{stream_rng, Stream};
use crate::{DenseMatrix, Error, Result};

/// Metrics after one epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpochRecord {
    /// 1-based epoch number.
    pub epoch: usize,
    /// Accuracy on the training inputs against the labels trained on.
    pub train_accuracy: f64,
    /// Accuracy on the test inputs against their true labels.
    pub test_accuracy: f64,
    /// Mean mini-batch loss over the epoch.
    pub loss: f64,
}

/// Per-epoch history of a training run.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainTrace {
    /// One record per completed epoch.
    pub epochs: Vec<EpochRecord>,
    /// Highest test accuracy seen.
    pub best_test_accuracy: f64,
    /// Earliest epoch reaching `best_test_accuracy` (0 if none ran).
    pub best_epoch: usize,
}

impl TrainTrace {
    fn push(&mut self, record: EpochRecord) {
        if self.epochs.is_empty() || record.test_accuracy > self.best_test_accuracy {
            self.best_test_accuracy = record.test_accuracy;
            self.best_epoch = record.epoch;
        }
        self.epochs.push(record);
    }

    /// The last record, if any epoch ran.
    pub fn last(&self) -> Option<&EpochRecord> {
        self.epochs.last()
    }
}

/// Fraction of `predicted` equal to `labels`.
pub fn accuracy(predicted: &[usize], labels: &[usize]) -> f64 {
    if predicted.is_empty() {
        return 0.0;
    }
    let hits = predicted.iter().zip(labels).filter(|(p, l)| p == l).count();
    hits as f64 / predicted.len() as f64
}

/// [`train_with`] without a per-epoch callback.
pub fn train(
    model: &mut MlpModel,
    train_set: &LabeledDataset,
    test_set: &LabeledDataset,
    shuffle_seed: u64,
) -> Result<TrainTrace> {
    train_with(model, train_set, test_set, shuffle_seed, |_| {})
}

/// Trains on the corrupted labels of `train_set` until the training accuracy
/// reaches the configured target or `max_epochs` epochs have run.
///
/// Each epoch reshuffles the training order, walks it in mini-batches (the
/// last one may be short) and then scores the whole training set against the
/// labels it was trained on and `test_set` against its true labels.
/// `on_epoch` sees every record as it is produced.
pub fn train_with<F: FnMut(&EpochRecord)>(
    model: &mut MlpModel,
    train_set: &LabeledDataset,
    test_set: &LabeledDataset,
    shuffle_seed: u64,
    mut on_epoch: F,
) -> Result<TrainTrace> {
    let config = model.config().clone();
    for (set, context) in [(train_set, "training inputs"), (test_set, "test inputs")] {
        if set.num_features() != config.input_dim {
            return Err(Error::DimensionMismatch {
                context,
                expected: config.input_dim,
                actual: set.num_features(),
            });
        }
        if set.num_classes() != config.num_classes {
            return Err(Error::DimensionMismatch {
                context: "dataset classes vs model outputs",
                expected: config.num_classes,
                actual: set.num_classes(),
            });
        }
    }
    if train_set.is_empty() {
        return Err(Error::invalid("empty training set"));
    }

    let labels = train_set.corrupted_labels();
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut rng = stream_rng(shuffle_seed, Stream::Shuffle);
    let mut grad = vec![0.0; model.parameters().len()];
    let mut batch_labels = Vec::with_capacity(config.batch_size);
    let mut trace = TrainTrace::default();

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for (b, idx) in order.chunks(config.batch_size).enumerate() {
            let x = train_set.inputs().select_rows(idx);
            batch_labels.clear();
            batch_labels.extend(idx.iter().map(|&i| labels[i]));
            let loss = model.backward_into(&x, &batch_labels, &mut grad)?;
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Diverged { epoch, batch: b });
            }
            model.apply_gradient(&grad);
            if model.first_non_finite().is_some() {
                return Err(Error::Diverged { epoch, batch: b });
            }
            loss_sum += loss;
            batches += 1;
        }
        model.finish_epoch();

        let record = EpochRecord {
            epoch,
            train_accuracy: score(model, train_set.inputs(), labels)?,
            test_accuracy: score(model, test_set.inputs(), test_set.true_labels())?,
            loss: loss_sum / batches as f64,
        };
        on_epoch(&record);
        trace.push(record);
        if record.train_accuracy >= config.target_train_accuracy {
            break;
        }
    }
    Ok(trace)
}

fn score(model: &MlpModel, inputs: &DenseMatrix, labels: &[usize]) -> Result<f64> {
    if inputs.rows() == 0 {
        return Ok(0.0);
    }
    Ok(accuracy(&model.predict(inputs)?, labels))
}
