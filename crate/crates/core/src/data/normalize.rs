use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{DenseMatrix, Error, Result};

/// Input preprocessing applied on ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Normalization {
    /// Bytes mapped into `[0, 1]`.
    #[default]
    DivideBy255,
    /// Per-channel zero mean and unit variance, with statistics taken from the
    /// training split only.
    PerChannelStandardize,
    /// Values used as they are.
    None,
}

/// Maps raw bytes into `[0, 1]`.
pub fn divide_by_255(bytes: &[u8]) -> Vec<f64> {
    bytes.iter().map(|&b| f64::from(b) / 255.0).collect()
}

/// Per-channel mean and standard deviation.
///
/// Features are taken to be channel-planar: with `C` channels and `F`
/// features, feature `j` belongs to channel `j / (F / C)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChannelStats {
    /// Channel means.
    pub mean: Vec<f64>,
    /// Channel standard deviations (population).
    pub std: Vec<f64>,
}

impl ChannelStats {
    /// Fits the statistics on `inputs` (normally the training split).
    pub fn fit(inputs: &DenseMatrix, channels: usize) -> Result<Self> {
        let per = plane_size(inputs.cols(), channels)?;
        let mut sum = vec![0.0; channels];
        let mut sq = vec![0.0; channels];
        for row in inputs.row_iter() {
            for (j, &v) in row.iter().enumerate() {
                sum[j / per] += v;
                sq[j / per] += v * v;
            }
        }
        let count = (inputs.rows() * per) as f64;
        if count == 0.0 {
            return Err(Error::invalid("cannot fit channel statistics on an empty matrix"));
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / count).collect();
        let std = sq
            .iter()
            .zip(&mean)
            .map(|(s, m)| libm::sqrt((s / count - m * m).max(0.0)))
            .collect();
        Ok(Self { mean, std })
    }

    /// Standardises `inputs` in place. Zero-variance channels are only centred.
    pub fn apply(&self, inputs: &mut DenseMatrix) -> Result<()> {
        let channels = self.mean.len();
        let per = plane_size(inputs.cols(), channels)?;
        for i in 0..inputs.rows() {
            for (j, v) in inputs.row_mut(i).iter_mut().enumerate() {
                let c = j / per;
                let s = if self.std[c] > 0.0 { self.std[c] } else { 1.0 };
                *v = (*v - self.mean[c]) / s;
            }
        }
        Ok(())
    }
}

fn plane_size(features: usize, channels: usize) -> Result<usize> {
    if channels == 0 || features % channels != 0 {
        return Err(Error::invalid(format!(
            "{features} features cannot be split into {channels} channels"
        )));
    }
    Ok(features / channels)
}
