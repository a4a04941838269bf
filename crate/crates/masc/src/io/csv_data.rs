//! Small custom datasets as CSV: an integer label in the first column, the
//! features in the rest.

use std::path::Path;

use masc_core::data::LabeledDataset;
use masc_core::DenseMatrix;

use crate::{Error, Result};

/// Reads a labelled CSV. With `num_classes` unset it is one more than the
/// largest label seen. Non-numeric or non-finite values are rejected with
/// their byte offset.
pub fn load_csv(path: &Path, has_header: bool, num_classes: Option<usize>) -> Result<LabeledDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut labels = Vec::new();
    let mut values = Vec::new();
    let mut width = None;
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let offset = record.position().map_or(0, |p| p.byte() as usize);
        let mut fields = record.iter();
        let label_text = fields.next().unwrap_or("").trim();
        let label: usize = label_text
            .parse()
            .map_err(|_| Error::format(path, offset, format!("label {label_text:?} is not a non-negative integer")))?;
        let before = values.len();
        for field in fields {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::format(path, offset, format!("feature {field:?} is not a number")))?;
            if !v.is_finite() {
                return Err(Error::format(path, offset, format!("non-finite feature {field:?}")));
            }
            values.push(v);
        }
        let w = values.len() - before;
        match width {
            None => width = Some(w),
            Some(expected) if expected != w => {
                return Err(Error::format(path, offset, format!("row has {w} features, expected {expected}")));
            }
            Some(_) => {}
        }
        labels.push(label);
    }
    let width = width.ok_or_else(|| Error::format(path, 0, "no data rows"))?;
    let c = num_classes.unwrap_or_else(|| labels.iter().max().map_or(0, |m| m + 1));
    let inputs = DenseMatrix::from_vec_finite(labels.len(), width, values)?;
    Ok(LabeledDataset::new(inputs, labels, c)?)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let offset = e.position().map_or(0, |p| p.byte() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::format(path, offset, format!("{other:?}")),
    }
}
