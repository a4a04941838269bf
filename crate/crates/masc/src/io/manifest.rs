//! Dataset manifests: where a dataset came from and how it was altered.

use std::path::Path;

use masc_core::data::Normalization;
use serde::{Deserialize, Serialize};

use super::{read_json, write_json};
use crate::Result;

/// Label corruption applied on top of a base dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptionRecord {
    /// Corruption degree.
    pub p: f64,
    /// Seed of the corruption stream.
    pub seed: u64,
    /// Fraction of training labels that actually changed.
    pub changed_fraction: f64,
    /// Identifier of the manifest of the uncorrupted dataset.
    pub parent: String,
}

/// Provenance of a dataset, written beside every dataset the harness uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    /// Short dataset name.
    pub name: String,
    /// Source files (empty for generated data).
    pub paths: Vec<String>,
    /// Preprocessing applied to the inputs.
    pub normalization: Normalization,
    /// Number of classes.
    pub num_classes: usize,
    /// Input width.
    pub num_features: usize,
    /// Training samples.
    pub train_size: usize,
    /// Test samples.
    pub test_size: usize,
    /// Seed used to draw the subset or split.
    pub selection_seed: u64,
    /// Set on corrupted derivatives.
    #[serde(default)]
    pub corruption: Option<CorruptionRecord>,
}

impl DatasetManifest {
    /// Content identifier of the manifest (CRC-32 of its canonical JSON).
    pub fn id(&self) -> String {
        super::content_id(&serde_json::to_vec(self).expect("manifest serialises"))
    }

    /// Writes the manifest as pretty JSON.
    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    /// Reads a manifest.
    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }
}
