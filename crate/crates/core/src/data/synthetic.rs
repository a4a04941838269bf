use alloc::format;
use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use super::LabeledDataset;
use crate::linalg::orthonormalize_columns;
use crate::rng::{stream_rng, Stream};
use crate::{DenseMatrix, Error, Result};

/// Parameters of a union-of-subspaces dataset.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SyntheticSpec {
    /// Number of classes.
    pub num_classes: usize,
    /// Samples drawn per class.
    pub samples_per_class: usize,
    /// Dimension of the ambient space.
    pub ambient_dim: usize,
    /// Dimension of each class subspace.
    pub subspace_dim_per_class: usize,
    /// Standard deviation of the isotropic Gaussian noise added to every sample.
    pub noise_sigma: f64,
    /// Generator seed.
    pub seed: u64,
}

impl SyntheticSpec {
    fn validate(&self) -> Result<()> {
        if self.num_classes == 0 || self.samples_per_class == 0 || self.ambient_dim == 0 {
            return Err(Error::invalid("synthetic spec needs classes, samples and dimensions"));
        }
        if self.subspace_dim_per_class == 0 || self.subspace_dim_per_class > self.ambient_dim {
            return Err(Error::invalid(format!(
                "subspace dimension {} must be in 1..={}",
                self.subspace_dim_per_class, self.ambient_dim
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::invalid(format!("noise sigma {} must be >= 0", self.noise_sigma)));
        }
        Ok(())
    }
}

/// Samples a labelled union of random linear subspaces.
///
/// Each class gets a random orthonormal basis; its samples are standard
/// Gaussian combinations of that basis plus isotropic noise of scale
/// `noise_sigma`. Samples are grouped by class, class 0 first.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let mut rng = stream_rng(spec.seed, Stream::Synthetic);
    let d = spec.ambient_dim;
    let s = spec.subspace_dim_per_class;
    let n = spec.num_classes * spec.samples_per_class;
    let mut data = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    let mut gauss = move || -> f64 { StandardNormal.sample(&mut rng) };

    for class in 0..spec.num_classes {
        let raw: Vec<f64> = (0..d * s).map(|_| gauss()).collect();
        let mut basis = DenseMatrix::from_vec(d, s, raw)?;
        orthonormalize_columns(&mut basis);
        for _ in 0..spec.samples_per_class {
            let coeffs: Vec<f64> = (0..s).map(|_| gauss()).collect();
            for i in 0..d {
                let signal: f64 = basis.row(i).iter().zip(&coeffs).map(|(b, c)| b * c).sum();
                let noise = if spec.noise_sigma > 0.0 { spec.noise_sigma * gauss() } else { 0.0 };
                data.push(signal + noise);
            }
            labels.push(class);
        }
    }
    LabeledDataset::new(DenseMatrix::from_vec_finite(n, d, data)?, labels, spec.num_classes)
}
