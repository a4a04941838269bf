//! Minimum-angle subspace classification (MASC) over the layerwise
//! activations of small dense networks.
//!
//! The pipeline is: corrupt training labels, train an MLP on them, collect the
//! activations of one layer, estimate one PCA subspace through the origin per
//! class, and label every sample by the class subspace it makes the smallest
//! angle with.
//!
//! This crate is `no_std` (it needs `alloc`). File formats, the experiment
//! harness and the command line live in the companion `masc` crate.
#![no_std]
#![warn(missing_docs)]

extern crate alloc;

pub mod data;
mod error;
pub mod linalg;
pub mod masc;
pub mod model;
pub mod rng;
pub mod subspace;

pub use error::{Error, Result};
pub use linalg::DenseMatrix;
