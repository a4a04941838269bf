//! File formats, experiment harness and command line around [`masc_core`].
//!
//! The harness reproduces the layerwise probing experiments on memorising
//! networks: train on label-corrupted data, fit one subspace per class at
//! every layer, and score minimum-angle classification against corrupted
//! labels, true labels and held-out data.

#![warn(missing_docs)]

mod error;
pub mod harness;
pub mod io;

pub use error::{Error, Result};
pub use masc_core;
