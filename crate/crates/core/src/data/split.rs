use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::LabeledDataset;
use crate::rng::{stream_rng, Stream};
use crate::{Error, Result};

fn indices_by_class(dataset: &LabeledDataset) -> Vec<Vec<usize>> {
    let mut by_class = vec![Vec::new(); dataset.num_classes()];
    for (i, &l) in dataset.true_labels().iter().enumerate() {
        by_class[l].push(i);
    }
    by_class
}

/// Splits `dataset` into a training part and a held-out part holding roughly
/// `fraction` of every class (stratified on the true labels).
///
/// Both parts keep the original sample order. Every class that is present
/// must have at least two samples so that it appears on both sides.
pub fn split_holdout(
    dataset: &LabeledDataset,
    fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid(format!("hold-out fraction {fraction} outside (0, 1)")));
    }
    let mut rng = stream_rng(seed, Stream::Split);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, mut idx) in indices_by_class(dataset).into_iter().enumerate() {
        if idx.is_empty() {
            continue;
        }
        if idx.len() < 2 {
            return Err(Error::invalid(format!(
                "class {class} has {} sample(s); at least 2 are needed to split",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        let n = idx.len();
        let n_test = (libm::round(fraction * n as f64) as usize).clamp(1, n - 1);
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((dataset.subset(&train), dataset.subset(&test)))
}

/// Draws exactly `per_class` samples of every class (by true label) at
/// random, keeping the original order. Fails if any class is too small.
pub fn stratified_subset(
    dataset: &LabeledDataset,
    per_class: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    let chosen = stratified_indices(dataset.true_labels(), dataset.num_classes(), per_class, seed)?;
    Ok(dataset.subset(&chosen))
}

/// The sorted row indices [`stratified_subset`] would keep, computed from the
/// labels alone.
pub fn stratified_indices(labels: &[usize], num_classes: usize, per_class: usize, seed: u64) -> Result<Vec<usize>> {
    let mut by_class = vec![Vec::new(); num_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class
            .get_mut(l)
            .ok_or_else(|| Error::invalid(format!("label {l} out of range")))?
            .push(i);
    }
    let mut rng = stream_rng(seed, Stream::Subset);
    let mut chosen = Vec::with_capacity(per_class * num_classes);
    for (class, mut idx) in by_class.into_iter().enumerate() {
        if idx.len() < per_class {
            return Err(Error::invalid(format!(
                "class {class} has {} samples, {per_class} requested",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        chosen.extend_from_slice(&idx[..per_class]);
    }
    chosen.sort_unstable();
    Ok(chosen)
}
