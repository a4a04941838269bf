//! Labelled datasets, the label-corruption protocol, synthetic subspace data
//! and the IDX byte format.

mod corrupt;
mod dataset;
pub mod idx;
mod normalize;
mod split;
mod synthetic;

pub use corrupt::{changed_fraction, corrupt_labels};
pub use dataset::LabeledDataset;
pub use normalize::{divide_by_255, ChannelStats, Normalization};
pub use split::{split_holdout, stratified_indices, stratified_subset};
pub use synthetic::{generate_synthetic, SyntheticSpec};
