use alloc::vec;
use alloc::vec::Vec;

use super::Optimizer;

/// Optimiser memory, aligned element-for-element with the flat parameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum OptimizerState {
    /// SGD velocity.
    Sgd {
        /// Velocity per parameter.
        velocity: Vec<f64>,
    },
    /// Adam moments.
    Adam {
        /// First moment.
        m: Vec<f64>,
        /// Second moment.
        v: Vec<f64>,
        /// Number of steps taken.
        step: u64,
    },
}

impl OptimizerState {
    pub(crate) fn new(optimizer: &Optimizer, len: usize) -> Self {
        match optimizer {
            Optimizer::Sgd { .. } => OptimizerState::Sgd {
                velocity: vec![0.0; len],
            },
            Optimizer::Adam { .. } => OptimizerState::Adam {
                m: vec![0.0; len],
                v: vec![0.0; len],
                step: 0,
            },
        }
    }

    /// Applies one update with gradient `grad` to `params`.
    pub(crate) fn step(&mut self, optimizer: &Optimizer, params: &mut [f64], grad: &[f64]) {
        debug_assert_eq!(params.len(), grad.len());
        match (self, *optimizer) {
            (
                OptimizerState::Sgd { velocity },
                Optimizer::Sgd {
                    learning_rate,
                    momentum,
                },
            ) => {
                for ((w, vel), &g) in params.iter_mut().zip(velocity.iter_mut()).zip(grad) {
                    *vel = momentum * *vel - learning_rate * g;
                    *w += *vel;
                }
            }
            (
                OptimizerState::Adam { m, v, step },
                Optimizer::Adam {
                    learning_rate,
                    beta1,
                    beta2,
                    epsilon,
                },
            ) => {
                *step += 1;
                let t = *step as f64;
                let c1 = 1.0 - libm::pow(beta1, t);
                let c2 = 1.0 - libm::pow(beta2, t);
                for (((w, mi), vi), &g) in params.iter_mut().zip(m.iter_mut()).zip(v.iter_mut()).zip(grad) {
                    *mi = beta1 * *mi + (1.0 - beta1) * g;
                    *vi = beta2 * *vi + (1.0 - beta2) * g * g;
                    let m_hat = *mi / c1;
                    let v_hat = *vi / c2;
                    *w -= learning_rate * m_hat / (libm::sqrt(v_hat) + epsilon);
                }
            }
            _ => unreachable!("optimizer state does not match optimizer kind"),
        }
    }

    /// Number of parameters the state covers.
    pub fn len(&self) -> usize {
        match self {
            OptimizerState::Sgd { velocity } => velocity.len(),
            OptimizerState::Adam { m, .. } => m.len(),
        }
    }

    /// True for an empty state.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn matches(&self, optimizer: &Optimizer) -> bool {
        matches!(
            (self, optimizer),
            (OptimizerState::Sgd { .. }, Optimizer::Sgd { .. })
                | (OptimizerState::Adam { .. }, Optimizer::Adam { .. })
        )
    }
}
