//! Experiment configuration, usually read from TOML.

use std::path::{Path, PathBuf};

use masc_core::data::{Normalization, SyntheticSpec};
use masc_core::model::{MlpConfig, Optimizer};
use masc_core::subspace::DEFAULT_VARIANCE_THRESHOLD;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Which experiment family to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Train on corrupted labels, fit banks on the corrupted labels.
    CorruptedSubspaces,
    /// Same trained models, banks fitted on the true labels (corrupted banks
    /// reported alongside).
    TrueLabelSubspaces,
    /// One generalised model per run; banks fitted on labels corrupted after
    /// training.
    InducedMemorization,
    /// Untrained models, after checking they score at chance.
    RandomInitControl,
}

impl ExperimentKind {
    /// Snake-case name used in reports.
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::CorruptedSubspaces => "corrupted_subspaces",
            ExperimentKind::TrueLabelSubspaces => "true_label_subspaces",
            ExperimentKind::InducedMemorization => "induced_memorization",
            ExperimentKind::RandomInitControl => "random_init_control",
        }
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            ExperimentKind::CorruptedSubspaces,
            ExperimentKind::TrueLabelSubspaces,
            ExperimentKind::InducedMemorization,
            ExperimentKind::RandomInitControl,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
        .ok_or_else(|| Error::Config(format!("unknown experiment kind {s:?}")))
    }
}

/// Size preset for the network and its training budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Widths `[128, 512]`, at most 50 epochs.
    #[default]
    Desk,
    /// Widths `[128, 512, 2048, 2048]`, at most 500 epochs.
    Paper,
}

impl std::str::FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Profile::Desk),
            "paper" => Ok(Profile::Paper),
            _ => Err(Error::Config(format!("unknown profile {s:?} (desk or paper)"))),
        }
    }
}

/// Where the samples come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DatasetSpec {
    /// The four standard MNIST IDX files in `dir`, subsampled to balanced
    /// training and test sets of the given sizes.
    Mnist {
        /// Directory holding `train-images-idx3-ubyte` and friends.
        dir: PathBuf,
        /// Training samples, a multiple of 10.
        train_size: usize,
        /// Test samples, a multiple of 10.
        test_size: usize,
    },
    /// Labelled CSV files (label first).
    Csv {
        /// Training file.
        train: PathBuf,
        /// Test file.
        test: PathBuf,
        /// Whether the first row is a header.
        #[serde(default)]
        has_header: bool,
        /// Class count; inferred from the labels when absent.
        #[serde(default)]
        num_classes: Option<usize>,
    },
    /// A generated union of subspaces, split into training and test parts.
    Synthetic {
        /// Generator parameters.
        spec: SyntheticSpec,
        /// Fraction held out for testing.
        test_fraction: f64,
    },
}

impl DatasetSpec {
    /// Short name used in reports.
    pub fn name(&self) -> &'static str {
        match self {
            DatasetSpec::Mnist { .. } => "mnist",
            DatasetSpec::Csv { .. } => "csv",
            DatasetSpec::Synthetic { .. } => "synthetic",
        }
    }
}

/// Optional replacements for the profile's network settings.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelOverrides {
    /// Hidden layer widths.
    #[serde(default)]
    pub hidden_widths: Option<Vec<usize>>,
    /// Optimiser.
    #[serde(default)]
    pub optimizer: Option<Optimizer>,
    /// Mini-batch size.
    #[serde(default)]
    pub batch_size: Option<usize>,
    /// Epoch cap.
    #[serde(default)]
    pub max_epochs: Option<usize>,
    /// Training stops once this accuracy on the trained labels is reached.
    #[serde(default)]
    pub target_train_accuracy: Option<f64>,
}

fn default_degrees() -> Vec<f64> {
    vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
}

fn default_thresholds() -> Vec<f64> {
    vec![DEFAULT_VARIANCE_THRESHOLD]
}

fn default_runs() -> usize {
    3
}

fn default_workers() -> usize {
    1
}

fn default_true() -> bool {
    true
}

/// Everything one experiment needs. Usually read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Experiment family.
    pub experiment_kind: ExperimentKind,
    /// Size preset.
    #[serde(default)]
    pub profile: Profile,
    /// Data source.
    pub dataset: DatasetSpec,
    /// Input preprocessing.
    #[serde(default)]
    pub normalization: Normalization,
    /// Corruption degrees to sweep.
    #[serde(default = "default_degrees")]
    pub corruption_degrees: Vec<f64>,
    /// Variance fractions the banks must explain.
    #[serde(default = "default_thresholds")]
    pub variance_thresholds: Vec<f64>,
    /// Independent repetitions per degree.
    #[serde(default = "default_runs")]
    pub num_runs: usize,
    /// Root of every seed in the experiment.
    #[serde(default)]
    pub master_seed: u64,
    /// Directory receiving every artifact.
    pub output_dir: PathBuf,
    /// Network overrides on top of the profile.
    #[serde(default)]
    pub model: ModelOverrides,
    /// Layers to probe (0 is the input); all when absent.
    #[serde(default)]
    pub layers: Option<Vec<usize>>,
    /// Reuse a checkpoint found at the expected path if it was trained with
    /// the same configuration and seeds.
    #[serde(default = "default_true")]
    pub reuse_checkpoints: bool,
    /// Also write per-sample MASC predictions for the test split.
    #[serde(default)]
    pub write_predictions: bool,
    /// Jobs run at once. Results do not depend on it.
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl ExperimentConfig {
    /// Parses TOML. Relative paths stay relative to the working directory.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads and parses a TOML file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Checks ranges.
    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.num_runs == 0 {
            return Err(Error::Config("num_runs must be at least 1".into()));
        }
        if self.corruption_degrees.is_empty() {
            return Err(Error::Config("corruption_degrees is empty".into()));
        }
        if let Some(p) = self.corruption_degrees.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Config(format!("corruption degree {p} outside [0, 1]")));
        }
        if self.variance_thresholds.is_empty() {
            return Err(Error::Config("variance_thresholds is empty".into()));
        }
        if let Some(t) = self.variance_thresholds.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
            return Err(Error::Config(format!("variance threshold {t} outside (0, 1]")));
        }
        match &self.dataset {
            DatasetSpec::Mnist {
                train_size, test_size, ..
            } => {
                if *train_size == 0 || *test_size == 0 || train_size % 10 != 0 || test_size % 10 != 0 {
                    return Err(Error::Config("MNIST train_size and test_size must be positive multiples of 10".into()));
                }
            }
            DatasetSpec::Synthetic { test_fraction, .. } => {
                if !(*test_fraction > 0.0 && *test_fraction < 1.0) {
                    return Err(Error::Config(format!("test_fraction {test_fraction} outside (0, 1)")));
                }
            }
            DatasetSpec::Csv { .. } => {}
        }
        // Catch bad overrides before any data is loaded.
        self.model_config(1, 2, 0)?;
        Ok(())
    }

    /// Network configuration for the given data shape and initial seed.
    pub fn model_config(&self, input_dim: usize, num_classes: usize, init_seed: u64) -> Result<MlpConfig> {
        let mut c = match self.profile {
            Profile::Desk => MlpConfig::desk(input_dim, num_classes),
            Profile::Paper => MlpConfig::paper(input_dim, num_classes, Optimizer::adam(1e-4)),
        };
        let o = &self.model;
        if let Some(w) = &o.hidden_widths {
            c.hidden_widths = w.clone();
        }
        if let Some(opt) = o.optimizer {
            c.optimizer = opt;
        }
        if let Some(b) = o.batch_size {
            c.batch_size = b;
        }
        if let Some(e) = o.max_epochs {
            c.max_epochs = e;
        }
        if let Some(t) = o.target_train_accuracy {
            c.target_train_accuracy = t;
        }
        c.init_seed = init_seed;
        c.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(c)
    }

    /// Layers to probe for a network with `hidden` hidden layers.
    pub fn probe_layers(&self, hidden: usize) -> Result<Vec<usize>> {
        match &self.layers {
            None => Ok((0..=hidden).collect()),
            Some(ls) => {
                if let Some(bad) = ls.iter().find(|&&l| l > hidden) {
                    return Err(Error::Config(format!("layer {bad} out of range 0..={hidden}")));
                }
                Ok(ls.clone())
            }
        }
    }
}
