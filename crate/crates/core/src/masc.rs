//! Minimum-angle classification against a [`SubspaceBank`].
//!
//! The angle between `x` and a subspace with orthonormal basis `B` is
//! `acos(‖Bᵀx‖ / ‖x‖)`. Labels are chosen by the largest cosine, which is the
//! smallest angle without paying for `acos` in the comparison.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::linalg::gemm;
use crate::subspace::SubspaceBank;
use crate::{DenseMatrix, Error, Result};

/// Rows projected per GEMM call.
const ROW_CHUNK: usize = 1024;

/// Outcome for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct MascPrediction {
    /// Smallest class index attaining the minimum angle; 0 when degenerate.
    pub predicted_label: usize,
    /// Angle to each class subspace, in `[0, π/2]`.
    pub angles: Vec<f64>,
    /// The sample was the zero vector; every angle is then reported as π/2.
    pub degenerate: bool,
}

impl MascPrediction {
    /// Angle to the predicted class.
    pub fn min_angle(&self) -> f64 {
        self.angles[self.predicted_label]
    }
}

/// Which accuracy an [`EvaluationResult`] reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MetricKind {
    /// Training activations scored against the labels trained on.
    MascCorruptedTrain,
    /// Training activations scored against the true labels.
    MascOriginalTrain,
    /// Test activations scored against the true labels.
    MascTest,
}

impl MetricKind {
    /// Snake-case name used in reports.
    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::MascCorruptedTrain => "masc_corrupted_train",
            MetricKind::MascOriginalTrain => "masc_original_train",
            MetricKind::MascTest => "masc_test",
        }
    }
}

/// Accuracy of a bank on a labelled set of activations.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvaluationResult {
    /// Fraction of rows whose prediction equals the reference label.
    pub accuracy: f64,
    /// Rows scored.
    pub num_samples: usize,
    /// Zero rows among them (still scored, as class 0).
    pub num_degenerate: usize,
    /// What was measured.
    pub metric_kind: MetricKind,
}

/// Classifies one vector.
pub fn classify(x: &[f64], bank: &SubspaceBank) -> Result<MascPrediction> {
    let row = DenseMatrix::from_vec(1, x.len(), x.to_vec())?;
    Ok(classify_batch(&row, bank)?.pop().expect("one row in, one prediction out"))
}

/// Classifies every row of `activations`; the result matches [`classify`]
/// applied row by row, bit for bit.
pub fn classify_batch(activations: &DenseMatrix, bank: &SubspaceBank) -> Result<Vec<MascPrediction>> {
    let mut out = Vec::with_capacity(activations.rows());
    for_each_cosines(activations, bank, |cosines, degenerate| {
        out.push(if degenerate {
            MascPrediction {
                predicted_label: 0,
                angles: vec![FRAC_PI_2; cosines.len()],
                degenerate: true,
            }
        } else {
            MascPrediction {
                predicted_label: argmax(cosines),
                angles: cosines.iter().map(|&c| libm::acos(c)).collect(),
                degenerate: false,
            }
        });
    })?;
    Ok(out)
}

/// Scores the rows of `activations` against `reference_labels`.
pub fn evaluate(
    activations: &DenseMatrix,
    reference_labels: &[usize],
    bank: &SubspaceBank,
    metric_kind: MetricKind,
) -> Result<EvaluationResult> {
    if reference_labels.len() != activations.rows() {
        return Err(Error::DimensionMismatch {
            context: "reference labels vs activation rows",
            expected: activations.rows(),
            actual: reference_labels.len(),
        });
    }
    let mut hits = 0usize;
    let mut degenerate_rows = 0usize;
    let mut i = 0usize;
    for_each_cosines(activations, bank, |cosines, degenerate| {
        let label = if degenerate {
            degenerate_rows += 1;
            0
        } else {
            argmax(cosines)
        };
        if label == reference_labels[i] {
            hits += 1;
        }
        i += 1;
    })?;
    let n = activations.rows();
    Ok(EvaluationResult {
        accuracy: if n == 0 { 0.0 } else { hits as f64 / n as f64 },
        num_samples: n,
        num_degenerate: degenerate_rows,
        metric_kind,
    })
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Calls `f(cosines, degenerate)` for every row in order. All class bases
/// are stacked side by side so one GEMM per chunk yields every coefficient.
fn for_each_cosines<F: FnMut(&[f64], bool)>(activations: &DenseMatrix, bank: &SubspaceBank, mut f: F) -> Result<()> {
    let width = bank.width;
    if activations.cols() != width {
        return Err(Error::DimensionMismatch {
            context: "activation columns vs bank width",
            expected: width,
            actual: activations.cols(),
        });
    }
    let c = bank.num_classes();
    if c == 0 {
        return Err(Error::invalid("bank has no classes"));
    }
    let mut offsets = Vec::with_capacity(c + 1);
    offsets.push(0);
    for s in &bank.subspaces {
        if s.basis.rows() != width {
            return Err(Error::invalid("bank basis width disagrees with bank width"));
        }
        offsets.push(offsets.last().unwrap() + s.basis.cols());
    }
    let total = offsets[c];
    let mut stacked = DenseMatrix::zeros(width, total);
    for (s, &off) in bank.subspaces.iter().zip(&offsets) {
        for r in 0..width {
            stacked.row_mut(r)[off..off + s.basis.cols()].copy_from_slice(s.basis.row(r));
        }
    }

    let mut coeffs = vec![0.0; ROW_CHUNK.min(activations.rows().max(1)) * total];
    let mut cosines = vec![0.0; c];
    let mut start = 0;
    while start < activations.rows() {
        let m = ROW_CHUNK.min(activations.rows() - start);
        let x = &activations.as_slice()[start * width..(start + m) * width];
        if total > 0 {
            gemm(
                m,
                width,
                total,
                1.0,
                (x, width as isize, 1),
                (stacked.as_slice(), total as isize, 1),
                0.0,
                (&mut coeffs[..m * total], total as isize, 1),
            );
        }
        for i in 0..m {
            let row = &x[i * width..(i + 1) * width];
            let sq: f64 = row.iter().map(|v| v * v).sum();
            if sq == 0.0 {
                f(&cosines, true);
                continue;
            }
            let nx = libm::sqrt(sq);
            let ci = &coeffs[i * total..(i + 1) * total];
            for (k, cos) in cosines.iter_mut().enumerate() {
                let seg = &ci[offsets[k]..offsets[k + 1]];
                let p: f64 = seg.iter().map(|v| v * v).sum();
                *cos = (libm::sqrt(p) / nx).clamp(0.0, 1.0);
            }
            f(&cosines, false);
        }
        start += m;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subspace::{estimate_bank, BankParams, LabelSource};

    /// Classes 0..4 each spanned by one axis of R^5; class 4 gets e4.
    fn axis_bank() -> SubspaceBank {
        let x = DenseMatrix::identity(5);
        estimate_bank(
            &x,
            &[0, 1, 2, 3, 4],
            &BankParams {
                num_classes: 5,
                variance_threshold: 0.99,
                layer_index: 0,
                label_source: LabelSource::True,
            },
        )
        .unwrap()
    }

    #[test]
    fn point_on_one_subspace() {
        let p = classify(&[0.0, 0.0, 0.0, 2.5, 0.0], &axis_bank()).unwrap();
        assert_eq!(p.predicted_label, 3);
        assert_eq!(p.angles.iter().filter(|&&a| a == 0.0).count(), 1);
        assert!(p.angles.iter().enumerate().all(|(i, &a)| i == 3 || (a - FRAC_PI_2).abs() < 1e-15));
    }

    #[test]
    fn ties_go_to_the_smallest_index() {
        let p = classify(&[0.0, 1.0, 0.0, 0.0, 1.0], &axis_bank()).unwrap();
        assert_eq!(p.angles[1], p.angles[4]);
        assert_eq!(p.predicted_label, 1);
    }

    #[test]
    fn zero_vector_is_degenerate() {
        let p = classify(&[0.0; 5], &axis_bank()).unwrap();
        assert!(p.degenerate);
        assert_eq!(p.predicted_label, 0);
        assert!(p.angles.iter().all(|&a| a == FRAC_PI_2));
    }

    #[test]
    fn evaluate_counts() {
        let bank = axis_bank();
        let x = DenseMatrix::from_rows(&[[1.0, 0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 3.0, 0.0, 0.0], [0.0; 5]]).unwrap();
        let r = evaluate(&x, &[0, 2, 0], &bank, MetricKind::MascTest).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.num_degenerate, 1);
        let r = evaluate(&x, &[1, 2, 3], &bank, MetricKind::MascTest).unwrap();
        assert!((r.accuracy - 1.0 / 3.0).abs() < 1e-15);
        assert!(evaluate(&x, &[0], &bank, MetricKind::MascTest).is_err());
    }

    #[test]
    fn width_mismatch_is_an_error() {
        assert!(classify(&[1.0, 2.0], &axis_bank()).is_err());
    }
}
