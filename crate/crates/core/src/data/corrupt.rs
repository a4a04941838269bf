use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use super::LabeledDataset;
use crate::rng::{stream_rng, Stream};
use crate::{Error, Result};

/// Corrupts the training labels with degree `p`.
///
/// Independently for every sample, with probability `p` the label is redrawn
/// uniformly over all `c` classes. The redraw may land on the original class,
/// so the expected fraction of labels that actually change is `p (1 − 1/c)`.
/// Corruption always starts from the true labels, which are left untouched.
pub fn corrupt_labels(dataset: &LabeledDataset, p: f64, seed: u64) -> Result<LabeledDataset> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("corruption degree {p} outside [0, 1]")));
    }
    let c = dataset.num_classes();
    let mut rng = stream_rng(seed, Stream::Corruption);
    let corrupted: Vec<usize> = dataset
        .true_labels()
        .iter()
        .map(|&label| {
            let u: f64 = rng.random();
            if u < p {
                rng.random_range(0..c)
            } else {
                label
            }
        })
        .collect();
    LabeledDataset::with_corruption(
        dataset.inputs().clone(),
        dataset.true_labels().to_vec(),
        corrupted,
        c,
        p,
        seed,
    )
}

/// Fraction of samples whose corrupted label differs from the true one.
pub fn changed_fraction(dataset: &LabeledDataset) -> f64 {
    if dataset.is_empty() {
        return 0.0;
    }
    let changed = dataset
        .true_labels()
        .iter()
        .zip(dataset.corrupted_labels())
        .filter(|(a, b)| a != b)
        .count();
    changed as f64 / dataset.len() as f64
}
