use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Optimiser and its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Optimizer {
    /// Heavy-ball SGD: `v ← μv − ηg`, `w ← w + v`.
    Sgd {
        /// Step size η.
        learning_rate: f64,
        /// Momentum μ in `[0, 1)`.
        momentum: f64,
    },
    /// Adam with bias correction.
    Adam {
        /// Step size.
        learning_rate: f64,
        /// First-moment decay.
        beta1: f64,
        /// Second-moment decay.
        beta2: f64,
        /// Denominator fuzz.
        epsilon: f64,
    },
}

impl Optimizer {
    /// Adam with the customary `β1 = 0.9`, `β2 = 0.999`, `ε = 1e-8`.
    pub fn adam(learning_rate: f64) -> Self {
        Optimizer::Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    /// SGD with momentum.
    pub fn sgd(learning_rate: f64, momentum: f64) -> Self {
        Optimizer::Sgd {
            learning_rate,
            momentum,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Optimizer::Sgd {
                learning_rate,
                momentum,
            } => {
                if !(learning_rate > 0.0 && learning_rate.is_finite()) {
                    return Err(Error::invalid(format!("learning rate {learning_rate} must be > 0")));
                }
                if !(0.0..1.0).contains(&momentum) {
                    return Err(Error::invalid(format!("momentum {momentum} outside [0, 1)")));
                }
            }
            Optimizer::Adam {
                learning_rate,
                beta1,
                beta2,
                epsilon,
            } => {
                if !(learning_rate > 0.0 && learning_rate.is_finite()) {
                    return Err(Error::invalid(format!("learning rate {learning_rate} must be > 0")));
                }
                if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) {
                    return Err(Error::invalid("Adam betas must lie in [0, 1)"));
                }
                if !(epsilon > 0.0) {
                    return Err(Error::invalid("Adam epsilon must be > 0"));
                }
            }
        }
        Ok(())
    }
}

/// Architecture and training hyperparameters of an [`MlpModel`](super::MlpModel).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MlpConfig {
    /// Width of the (preprocessed) input.
    pub input_dim: usize,
    /// Hidden layer widths, input side first.
    pub hidden_widths: Vec<usize>,
    /// Output classes.
    pub num_classes: usize,
    /// Optimiser.
    pub optimizer: Optimizer,
    /// Mini-batch size; the last, smaller batch of an epoch is kept.
    pub batch_size: usize,
    /// Upper bound on training epochs.
    pub max_epochs: usize,
    /// Training stops once accuracy on the (corrupted) training labels reaches this.
    pub target_train_accuracy: f64,
    /// Seed of the weight initialisation.
    pub init_seed: u64,
}

impl MlpConfig {
    /// The small profile: widths `[128, 512]`, Adam at `1e-4`, batches of 32,
    /// at most 50 epochs or 99% training accuracy.
    pub fn desk(input_dim: usize, num_classes: usize) -> Self {
        Self {
            input_dim,
            hidden_widths: vec![128, 512],
            num_classes,
            optimizer: Optimizer::adam(1e-4),
            batch_size: 32,
            max_epochs: 50,
            target_train_accuracy: 0.99,
            init_seed: 0,
        }
    }

    /// The full-size MLP: widths `[128, 512, 2048, 2048]`, batches of 32, at
    /// most 500 epochs or 99% training accuracy.
    pub fn paper(input_dim: usize, num_classes: usize, optimizer: Optimizer) -> Self {
        Self {
            hidden_widths: vec![128, 512, 2048, 2048],
            max_epochs: 500,
            optimizer,
            ..Self::desk(input_dim, num_classes)
        }
    }

    /// Checks every field.
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.num_classes < 2 {
            return Err(Error::invalid("need a positive input width and at least two classes"));
        }
        if self.hidden_widths.iter().any(|&w| w == 0) {
            return Err(Error::invalid("hidden widths must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.target_train_accuracy) {
            return Err(Error::invalid("target training accuracy outside [0, 1]"));
        }
        self.optimizer.validate()
    }

    /// Layer widths from input to output.
    pub fn layer_dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.hidden_widths.len() + 2);
        dims.push(self.input_dim);
        dims.extend_from_slice(&self.hidden_widths);
        dims.push(self.num_classes);
        dims
    }
}
