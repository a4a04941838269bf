use alloc::format;
use alloc::vec::Vec;

use crate::{DenseMatrix, Error, Result};

/// Inputs with their true labels and a (possibly) corrupted copy of them.
///
/// Training always reads `corrupted_labels`; evaluation against ground truth
/// reads `true_labels`. With corruption degree 0 the two are identical.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    inputs: DenseMatrix,
    true_labels: Vec<usize>,
    corrupted_labels: Vec<usize>,
    num_classes: usize,
    corruption_degree: f64,
    seed: u64,
}

impl LabeledDataset {
    /// An uncorrupted dataset (`p = 0`).
    pub fn new(inputs: DenseMatrix, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        let corrupted = labels.clone();
        Self::with_corruption(inputs, labels, corrupted, num_classes, 0.0, 0)
    }

    /// A dataset with an explicit corrupted label copy and its provenance.
    pub fn with_corruption(
        inputs: DenseMatrix,
        true_labels: Vec<usize>,
        corrupted_labels: Vec<usize>,
        num_classes: usize,
        corruption_degree: f64,
        seed: u64,
    ) -> Result<Self> {
        if num_classes == 0 {
            return Err(Error::invalid("num_classes must be positive"));
        }
        for labels in [&true_labels, &corrupted_labels] {
            if labels.len() != inputs.rows() {
                return Err(Error::DimensionMismatch {
                    context: "labels vs input rows",
                    expected: inputs.rows(),
                    actual: labels.len(),
                });
            }
            if let Some(bad) = labels.iter().find(|&&l| l >= num_classes) {
                return Err(Error::invalid(format!(
                    "label {bad} out of range for {num_classes} classes"
                )));
            }
        }
        if !(0.0..=1.0).contains(&corruption_degree) {
            return Err(Error::invalid(format!(
                "corruption degree {corruption_degree} outside [0, 1]"
            )));
        }
        Ok(Self {
            inputs,
            true_labels,
            corrupted_labels,
            num_classes,
            corruption_degree,
            seed,
        })
    }

    /// Samples × features.
    pub fn inputs(&self) -> &DenseMatrix {
        &self.inputs
    }

    /// Ground-truth labels.
    pub fn true_labels(&self) -> &[usize] {
        &self.true_labels
    }

    /// Labels used for training.
    pub fn corrupted_labels(&self) -> &[usize] {
        &self.corrupted_labels
    }

    /// Number of classes `c`.
    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Corruption degree `p` the corrupted labels were drawn with.
    pub fn corruption_degree(&self) -> f64 {
        self.corruption_degree
    }

    /// Seed the corrupted labels were drawn with.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.inputs.rows()
    }

    /// True when there are no samples.
    pub fn is_empty(&self) -> bool {
        self.inputs.rows() == 0
    }

    /// Feature count.
    pub fn num_features(&self) -> usize {
        self.inputs.cols()
    }

    /// The samples at `indices`, in that order, with both label copies.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            inputs: self.inputs.select_rows(indices),
            true_labels: indices.iter().map(|&i| self.true_labels[i]).collect(),
            corrupted_labels: indices.iter().map(|&i| self.corrupted_labels[i]).collect(),
            num_classes: self.num_classes,
            corruption_degree: self.corruption_degree,
            seed: self.seed,
        }
    }

    /// Replaces the inputs (e.g. after normalisation), keeping the labels.
    pub fn with_inputs(mut self, inputs: DenseMatrix) -> Result<Self> {
        if inputs.rows() != self.inputs.rows() {
            return Err(Error::DimensionMismatch {
                context: "replacement inputs rows",
                expected: self.inputs.rows(),
                actual: inputs.rows(),
            });
        }
        self.inputs = inputs;
        Ok(self)
    }

    /// Per-class sample counts under the true labels.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = alloc::vec![0; self.num_classes];
        for &l in &self.true_labels {
            counts[l] += 1;
        }
        counts
    }
}
