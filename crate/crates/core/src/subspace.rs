//! One linear subspace per class, fitted by PCA through the origin.
//!
//! Fitting a class on its samples together with their negatives centres the
//! data at zero and doubles every second-moment entry, which changes neither
//! the principal directions nor the variance ratios. The estimate is
//! therefore computed as uncentred PCA on the raw class rows.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::linalg::svd_thin;
use crate::{DenseMatrix, Error, Result};

/// Default fraction of variance the subspaces must explain.
pub const DEFAULT_VARIANCE_THRESHOLD: f64 = 0.99;

/// Which label set a bank was fitted against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LabelSource {
    /// The (possibly corrupted) labels the network was trained on.
    Corrupted,
    /// Ground truth.
    True,
}

impl LabelSource {
    /// Lower-case name used in reports.
    pub fn as_str(self) -> &'static str {
        match self {
            LabelSource::Corrupted => "corrupted",
            LabelSource::True => "true",
        }
    }
}

/// The subspace of a single class.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassSubspace {
    /// Class this subspace belongs to.
    pub class_id: usize,
    /// `width x k`, orthonormal columns, leading direction first.
    pub basis: DenseMatrix,
    /// Number of components `k`.
    pub num_components: usize,
    /// Cumulative variance ratio of the kept components (0 for a class
    /// without variance).
    pub explained_variance_ratio: f64,
    /// Rows the class was fitted on.
    pub num_training_samples: usize,
    /// Set when the class had no samples or only zero rows.
    pub zero_variance: bool,
}

/// Where a bank's inputs came from. Both fields are free-form identifiers.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BankProvenance {
    /// Identifier of the model checkpoint that produced the activations.
    pub model_checkpoint: Option<String>,
    /// Identifier of the dataset manifest.
    pub dataset_manifest: Option<String>,
}

/// One subspace per class, all living in the same layer.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SubspaceBank {
    /// Layer the activations came from (0 is the input).
    pub layer_index: usize,
    /// Labels used to partition the activations.
    pub label_source: LabelSource,
    /// Requested variance fraction in `(0, 1]`.
    pub variance_threshold: f64,
    /// Ambient dimension.
    pub width: usize,
    /// Subspace of class `i` at position `i`.
    pub subspaces: Vec<ClassSubspace>,
    /// Input identifiers.
    pub provenance: BankProvenance,
}

impl SubspaceBank {
    /// Number of classes.
    pub fn num_classes(&self) -> usize {
        self.subspaces.len()
    }

    /// Checks the structural invariants: one subspace per class in order,
    /// bases of the right width and `k` within bounds.
    pub fn validate(&self) -> Result<()> {
        check_threshold(self.variance_threshold)?;
        for (i, s) in self.subspaces.iter().enumerate() {
            if s.class_id != i {
                return Err(Error::invalid(format!("subspace {i} has class id {}", s.class_id)));
            }
            if s.basis.rows() != self.width || s.basis.cols() != s.num_components {
                return Err(Error::invalid(format!(
                    "class {i}: basis is {}x{}, expected {}x{}",
                    s.basis.rows(),
                    s.basis.cols(),
                    self.width,
                    s.num_components
                )));
            }
            if s.num_components > s.num_training_samples.min(self.width) {
                return Err(Error::invalid(format!("class {i}: too many components")));
            }
        }
        Ok(())
    }
}

/// Parameters of [`estimate_bank`] besides the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BankParams {
    /// Number of classes `c`; labels must lie in `0..c`.
    pub num_classes: usize,
    /// Fraction of variance to explain, in `(0, 1]`.
    pub variance_threshold: f64,
    /// Recorded in the bank.
    pub layer_index: usize,
    /// Recorded in the bank.
    pub label_source: LabelSource,
}

fn check_threshold(t: f64) -> Result<()> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::invalid(format!("variance threshold {t} outside (0, 1]")));
    }
    Ok(())
}

/// Fits one subspace per class to the rows of `activations` grouped by
/// `labels`.
///
/// For each class, `k` is the smallest number of leading components whose
/// squared singular values reach `variance_threshold` of the total. Singular
/// values under the rank cutoff are ignored, so `k` never exceeds the
/// numerical rank. A class without samples, or with only zero rows, gets an
/// empty basis.
pub fn estimate_bank(activations: &DenseMatrix, labels: &[usize], params: &BankParams) -> Result<SubspaceBank> {
    check_threshold(params.variance_threshold)?;
    if labels.len() != activations.rows() {
        return Err(Error::DimensionMismatch {
            context: "labels vs activation rows",
            expected: activations.rows(),
            actual: labels.len(),
        });
    }
    if params.num_classes == 0 {
        return Err(Error::invalid("num_classes must be positive"));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= params.num_classes) {
        return Err(Error::invalid(format!("label {bad} out of range")));
    }
    activations.check_finite()?;

    let mut members: Vec<Vec<usize>> = (0..params.num_classes).map(|_| Vec::new()).collect();
    for (i, &l) in labels.iter().enumerate() {
        members[l].push(i);
    }
    let width = activations.cols();
    let subspaces = members
        .iter()
        .enumerate()
        .map(|(class_id, rows)| fit_class(class_id, &activations.select_rows(rows), params.variance_threshold))
        .collect::<Result<Vec<_>>>()?;

    Ok(SubspaceBank {
        layer_index: params.layer_index,
        label_source: params.label_source,
        variance_threshold: params.variance_threshold,
        width,
        subspaces,
        provenance: BankProvenance::default(),
    })
}

fn fit_class(class_id: usize, data: &DenseMatrix, threshold: f64) -> Result<ClassSubspace> {
    let width = data.cols();
    let empty = |n| ClassSubspace {
        class_id,
        basis: DenseMatrix::zeros(width, 0),
        num_components: 0,
        explained_variance_ratio: 0.0,
        num_training_samples: n,
        zero_variance: true,
    };
    let n = data.rows();
    if n == 0 || width == 0 || data.max_abs() == 0.0 {
        return Ok(empty(n));
    }
    let svd = svd_thin(data)?;
    let rank = svd.numerical_rank();
    let energy: Vec<f64> = svd.singular_values[..rank].iter().map(|s| s * s).collect();
    let total: f64 = energy.iter().sum();
    if rank == 0 || total == 0.0 {
        return Ok(empty(n));
    }
    let k = minimal_components(&energy, total, threshold);
    let kept: f64 = energy[..k].iter().sum();
    Ok(ClassSubspace {
        class_id,
        basis: svd.right_vectors.leading_columns(k),
        num_components: k,
        explained_variance_ratio: kept / total,
        num_training_samples: n,
        zero_variance: false,
    })
}

/// Smallest `k` with `sum(energy[..k]) / total ≥ threshold`; all of them if
/// round-off keeps the full sum just under a threshold of 1.
fn minimal_components(energy: &[f64], total: f64, threshold: f64) -> usize {
    let mut acc = 0.0;
    for (i, e) in energy.iter().enumerate() {
        acc += e;
        if acc / total >= threshold {
            return i + 1;
        }
    }
    energy.len()
}

/// Per-class component counts of a bank with their summary.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComponentCounts {
    /// Layer of the bank.
    pub layer_index: usize,
    /// `k` of class `i` at position `i`.
    pub per_class: Vec<usize>,
    /// Smallest `k`.
    pub min: usize,
    /// Mean `k`.
    pub mean: f64,
    /// Largest `k`.
    pub max: usize,
}

/// Component counts of every class in `bank`.
pub fn component_counts(bank: &SubspaceBank) -> ComponentCounts {
    let per_class: Vec<usize> = bank.subspaces.iter().map(|s| s.num_components).collect();
    let n = per_class.len().max(1) as f64;
    ComponentCounts {
        layer_index: bank.layer_index,
        min: per_class.iter().copied().min().unwrap_or(0),
        max: per_class.iter().copied().max().unwrap_or(0),
        mean: per_class.iter().sum::<usize>() as f64 / n,
        per_class,
    }
}
