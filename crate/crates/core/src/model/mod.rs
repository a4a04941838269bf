//! A dense ReLU network with a softmax cross-entropy head, trained from
//! scratch with mini-batch SGD (with momentum) or Adam.

mod config;
mod mlp;
mod optim;
mod train;

pub use config::{MlpConfig, Optimizer};
pub use mlp::{extract_activations, init_model, ForwardPass, MlpModel};
pub use optim::OptimizerState;
pub use train::{accuracy, train, train_with, EpochRecord, TrainTrace};
