//! Small CSV tables: training traces, component counts and prediction dumps.

use std::path::Path;

use masc_core::masc::MascPrediction;
use masc_core::model::{EpochRecord, TrainTrace};
use masc_core::subspace::ComponentCounts;

use super::{read_bytes, write_bytes};
use crate::{Error, Result};

fn finish(path: &Path, writer: csv::Writer<Vec<u8>>) -> Result<()> {
    let bytes = writer.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    write_bytes(path, &bytes)
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let offset = e.position().map_or(0, |p| p.byte() as usize);
    Error::format(path, offset, e.to_string())
}

/// `epoch,train_acc,test_acc,loss`, one row per epoch.
pub fn write_trace_csv(path: &Path, trace: &TrainTrace) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let row = |w: &mut csv::Writer<Vec<u8>>, fields: [String; 4]| w.write_record(fields).map_err(|e| csv_err(path, e));
    row(&mut w, ["epoch", "train_acc", "test_acc", "loss"].map(String::from))?;
    for r in &trace.epochs {
        row(
            &mut w,
            [
                r.epoch.to_string(),
                r.train_accuracy.to_string(),
                r.test_accuracy.to_string(),
                r.loss.to_string(),
            ],
        )?;
    }
    finish(path, w)
}

/// Reads a trace written by [`write_trace_csv`]; floats round-trip exactly,
/// and the best epoch is recomputed.
pub fn read_trace_csv(path: &Path) -> Result<TrainTrace> {
    let bytes = read_bytes(path)?;
    let mut reader = csv::Reader::from_reader(bytes.as_slice());
    let mut trace = TrainTrace::default();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let offset = record.position().map_or(0, |p| p.byte() as usize);
        let field = |i: usize| -> Result<&str> {
            record.get(i).ok_or_else(|| Error::format(path, offset, "short trace row"))
        };
        let num = |i: usize| -> Result<f64> {
            field(i)?.parse().map_err(|_| Error::format(path, offset, "bad number in trace"))
        };
        let epoch: usize = field(0)?.parse().map_err(|_| Error::format(path, offset, "bad epoch"))?;
        let rec = EpochRecord {
            epoch,
            train_accuracy: num(1)?,
            test_accuracy: num(2)?,
            loss: num(3)?,
        };
        if trace.epochs.is_empty() || rec.test_accuracy > trace.best_test_accuracy {
            trace.best_test_accuracy = rec.test_accuracy;
            trace.best_epoch = rec.epoch;
        }
        trace.epochs.push(rec);
    }
    Ok(trace)
}

/// `layer,class,k` for every class of every bank summary given.
pub fn write_component_counts_csv(path: &Path, counts: &[ComponentCounts]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["layer", "class", "k"]).map_err(|e| csv_err(path, e))?;
    for c in counts {
        for (class, k) in c.per_class.iter().enumerate() {
            w.write_record([c.layer_index.to_string(), class.to_string(), k.to_string()])
                .map_err(|e| csv_err(path, e))?;
        }
    }
    finish(path, w)
}

/// `sample_index,predicted,reference,min_angle,degenerate`, one row per sample.
pub fn write_prediction_dump(path: &Path, predictions: &[MascPrediction], reference: &[usize]) -> Result<()> {
    if predictions.len() != reference.len() {
        return Err(Error::Config(format!(
            "{} predictions for {} reference labels",
            predictions.len(),
            reference.len()
        )));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["sample_index", "predicted", "reference", "min_angle", "degenerate"])
        .map_err(|e| csv_err(path, e))?;
    for (i, (p, r)) in predictions.iter().zip(reference).enumerate() {
        w.write_record([
            i.to_string(),
            p.predicted_label.to_string(),
            r.to_string(),
            p.min_angle().to_string(),
            p.degenerate.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    finish(path, w)
}
