//! NPY interchange for activations and labels.
//!
//! Activations are stored as `<f8` arrays of shape `(samples, width)`;
//! labels as 1-D integer arrays. A JSON sidecar ties an activation file to its
//! layer and label files, so activations produced elsewhere (for example by a
//! convolutional network) can be fed to the subspace and MASC stages.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use masc_core::DenseMatrix;
use npyz::WriterBuilder;
use serde::{Deserialize, Serialize};

use super::{read_json, write_json};
use crate::{Error, Result};

fn open(path: &Path) -> Result<npyz::NpyFile<BufReader<File>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    npyz::NpyFile::new(BufReader::new(file)).map_err(|e| Error::format(path, 0, e.to_string()))
}

fn type_str(npy: &npyz::NpyFile<BufReader<File>>) -> String {
    match npy.dtype() {
        npyz::DType::Plain(ts) => ts.to_string(),
        other => format!("{other:?}"),
    }
}

/// Writes a matrix as a C-ordered `<f8` array.
pub fn write_matrix(path: &Path, m: &DenseMatrix) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut buf = BufWriter::new(file);
    let mut writer = npyz::WriteOptions::new()
        .default_dtype()
        .shape(&[m.rows() as u64, m.cols() as u64])
        .writer(&mut buf)
        .begin_nd()
        .map_err(|e| Error::io(path, e))?;
    writer.extend(m.as_slice().iter().copied()).map_err(|e| Error::io(path, e))?;
    writer.finish().map_err(|e| Error::io(path, e))?;
    buf.flush().map_err(|e| Error::io(path, e))
}

/// Reads a 2-D C-ordered `<f8` array. NaN and infinities are rejected.
pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    let npy = open(path)?;
    let ts = type_str(&npy);
    if ts != "<f8" {
        return Err(Error::format(path, 0, format!("expected dtype <f8, found {ts}")));
    }
    if npy.order() != npyz::Order::C {
        return Err(Error::format(path, 0, "Fortran-ordered arrays are not supported"));
    }
    let shape = npy.shape().to_vec();
    let (rows, cols) = match shape[..] {
        [r, c] => (r as usize, c as usize),
        _ => return Err(Error::format(path, 0, format!("expected a 2-D array, found shape {shape:?}"))),
    };
    let data: Vec<f64> = npy.into_vec().map_err(|e| Error::format(path, 0, e.to_string()))?;
    DenseMatrix::from_vec_finite(rows, cols, data).map_err(|e| Error::in_file(path, e))
}

/// Writes labels as a 1-D `<i8` (int64) array.
pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut buf = BufWriter::new(file);
    let mut writer = npyz::WriteOptions::new()
        .default_dtype()
        .shape(&[labels.len() as u64])
        .writer(&mut buf)
        .begin_nd()
        .map_err(|e| Error::io(path, e))?;
    writer.extend(labels.iter().map(|&l| l as i64)).map_err(|e| Error::io(path, e))?;
    writer.finish().map_err(|e| Error::io(path, e))?;
    buf.flush().map_err(|e| Error::io(path, e))
}

/// Reads a 1-D array of non-negative integer labels (any of the common
/// signed or unsigned integer dtypes).
pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let npy = open(path)?;
    if npy.shape().len() != 1 {
        return Err(Error::format(path, 0, format!("expected a 1-D array, found shape {:?}", npy.shape())));
    }
    let ts = type_str(&npy);
    let bad = |e: std::io::Error| Error::format(path, 0, e.to_string());
    let signed: Vec<i64> = match ts.as_str() {
        "<i8" => npy.into_vec::<i64>().map_err(bad)?,
        "<i4" => npy.into_vec::<i32>().map_err(bad)?.into_iter().map(i64::from).collect(),
        "<i2" => npy.into_vec::<i16>().map_err(bad)?.into_iter().map(i64::from).collect(),
        "|i1" => npy.into_vec::<i8>().map_err(bad)?.into_iter().map(i64::from).collect(),
        "|u1" => npy.into_vec::<u8>().map_err(bad)?.into_iter().map(i64::from).collect(),
        "<u2" => npy.into_vec::<u16>().map_err(bad)?.into_iter().map(i64::from).collect(),
        "<u4" => npy.into_vec::<u32>().map_err(bad)?.into_iter().map(i64::from).collect(),
        "<u8" => npy
            .into_vec::<u64>()
            .map_err(bad)?
            .into_iter()
            .map(|v| i64::try_from(v).unwrap_or(-1))
            .collect(),
        other => return Err(Error::format(path, 0, format!("unsupported label dtype {other}"))),
    };
    signed
        .into_iter()
        .enumerate()
        .map(|(i, v)| usize::try_from(v).map_err(|_| Error::format(path, 0, format!("label {v} at index {i} is negative"))))
        .collect()
}

/// Metadata beside an activation file. Paths are relative to the sidecar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivationSidecar {
    /// Layer index (0 is the preprocessed input).
    pub layer_index: usize,
    /// Human-readable layer name.
    pub layer_name: String,
    /// Activation matrix (`<f8`, samples x width).
    pub activations: PathBuf,
    /// Labels to fit or score against (usually the corrupted training labels).
    pub labels: PathBuf,
    /// Ground-truth labels, when they differ from `labels`.
    #[serde(default)]
    pub true_labels: Option<PathBuf>,
    /// Number of classes.
    pub num_classes: usize,
    /// Whether the values were taken after the layer nonlinearity; `None`
    /// when the producer did not say.
    #[serde(default)]
    pub post_activation: Option<bool>,
    /// Free-form producer description.
    #[serde(default)]
    pub source: String,
}

/// Activations with their labels, loaded through a sidecar.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportedActivations {
    /// The sidecar as read.
    pub sidecar: ActivationSidecar,
    /// Samples x width.
    pub activations: DenseMatrix,
    /// Labels named by `sidecar.labels`.
    pub labels: Vec<usize>,
    /// Labels named by `sidecar.true_labels`, if any.
    pub true_labels: Option<Vec<usize>>,
}

/// Writes a sidecar.
pub fn write_sidecar(path: &Path, sidecar: &ActivationSidecar) -> Result<()> {
    write_json(path, sidecar)
}

/// Reads a sidecar and everything it names, checking that the pieces agree.
pub fn import_activations(sidecar_path: &Path) -> Result<ImportedActivations> {
    let sidecar: ActivationSidecar = read_json(sidecar_path)?;
    let base = sidecar_path.parent().unwrap_or(Path::new(""));
    let activations = read_matrix(&base.join(&sidecar.activations))?;
    let labels = read_labels(&base.join(&sidecar.labels))?;
    let true_labels = match &sidecar.true_labels {
        Some(p) => Some(read_labels(&base.join(p))?),
        None => None,
    };
    for (name, l) in std::iter::once(("labels", &labels)).chain(true_labels.iter().map(|t| ("true_labels", t))) {
        if l.len() != activations.rows() {
            return Err(Error::Config(format!(
                "{}: {name} has {} entries for {} activation rows",
                sidecar_path.display(),
                l.len(),
                activations.rows()
            )));
        }
        if let Some(bad) = l.iter().find(|&&v| v >= sidecar.num_classes) {
            return Err(Error::Config(format!(
                "{}: {name} contains {bad}, outside 0..{}",
                sidecar_path.display(),
                sidecar.num_classes
            )));
        }
    }
    Ok(ImportedActivations {
        sidecar,
        activations,
        labels,
        true_labels,
    })
}
