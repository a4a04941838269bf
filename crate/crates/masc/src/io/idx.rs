//! MNIST-style IDX file pairs.

use std::path::Path;

use masc_core::data::idx::{parse_images, parse_labels, IdxImages};
use masc_core::data::{divide_by_255, ChannelStats, LabeledDataset, Normalization};
use masc_core::DenseMatrix;

use super::read_bytes;
use crate::{Error, Result};

/// Raw bytes of an images file and its labels file, checked against each other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxPair {
    /// Decoded images.
    pub images: IdxImages,
    /// One byte per image.
    pub labels: Vec<u8>,
}

impl IdxPair {
    /// Reads both files. Errors name the offending file and byte offset.
    pub fn read(images_path: &Path, labels_path: &Path) -> Result<Self> {
        let images = parse_images(&read_bytes(images_path)?).map_err(|e| Error::in_file(images_path, e))?;
        let labels = parse_labels(&read_bytes(labels_path)?).map_err(|e| Error::in_file(labels_path, e))?;
        if labels.len() != images.count {
            return Err(Error::format(
                labels_path,
                4,
                format!("{} labels for {} images in {}", labels.len(), images.count, images_path.display()),
            ));
        }
        Ok(Self { images, labels })
    }

    /// Builds a dataset from the rows in `indices` (all rows when `None`),
    /// flattening each image to `rows * cols` features.
    ///
    /// `PerChannelStandardize` here uses the statistics of the selected rows
    /// themselves; to standardise a test split with training statistics,
    /// load both with `None` and use [`ChannelStats`] directly.
    pub fn to_dataset(&self, indices: Option<&[usize]>, normalization: Normalization) -> Result<LabeledDataset> {
        let all: Vec<usize>;
        let indices = match indices {
            Some(i) => i,
            None => {
                all = (0..self.images.count).collect();
                &all
            }
        };
        let width = self.images.rows * self.images.cols;
        let mut bytes = Vec::with_capacity(indices.len() * width);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.images.count {
                return Err(Error::Config(format!("image index {i} out of range")));
            }
            bytes.extend_from_slice(&self.images.pixels[i * width..(i + 1) * width]);
            labels.push(usize::from(self.labels[i]));
        }
        let values = match normalization {
            Normalization::DivideBy255 => divide_by_255(&bytes),
            Normalization::None | Normalization::PerChannelStandardize => bytes.iter().map(|&b| f64::from(b)).collect(),
        };
        let mut inputs = DenseMatrix::from_vec(indices.len(), width, values)?;
        if normalization == Normalization::PerChannelStandardize {
            ChannelStats::fit(&inputs, 1)?.apply(&mut inputs)?;
        }
        let num_classes = labels.iter().max().map_or(10, |&m| (m + 1).max(10));
        Ok(LabeledDataset::new(inputs, labels, num_classes)?)
    }
}

/// Loads a full IDX pair as a dataset with uncorrupted labels.
///
/// Labels are taken to range over at least 10 classes (more if a larger
/// label occurs).
pub fn load_idx(images_path: &Path, labels_path: &Path, normalization: Normalization) -> Result<LabeledDataset> {
    IdxPair::read(images_path, labels_path)?.to_dataset(None, normalization)
}
