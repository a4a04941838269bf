//! Model checkpoints.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic        8 bytes  "MASCMLP\0"
//! major, minor u16, u16
//! json length  u32
//! json         config, epochs trained, optimiser state kind and step
//! count        u64      number of parameters n
//! parameters   n x f64  layer by layer: weights (fan_in x fan_out, row-major), bias
//! state        n x f64  SGD velocity, or 2n x f64 Adam first then second moment
//! crc32        u32      over every preceding byte
//! ```

use std::path::Path;

use masc_core::model::{MlpConfig, MlpModel, OptimizerState};
use serde::{Deserialize, Serialize};

use super::{push_f64s, read_bytes, verify_crc, write_bytes, Reader};
use crate::{Error, Result};

/// File magic.
pub const CHECKPOINT_MAGIC: &[u8; 8] = b"MASCMLP\0";
/// Layout version; readers accept any minor version of their major.
pub const CHECKPOINT_VERSION: (u16, u16) = (1, 0);

#[derive(Serialize, Deserialize)]
struct Header {
    config: MlpConfig,
    epochs_trained: usize,
    state: StateKind,
    #[serde(default)]
    adam_step: u64,
}

#[derive(Serialize, Deserialize, PartialEq, Eq, Clone, Copy)]
#[serde(rename_all = "snake_case")]
enum StateKind {
    Sgd,
    Adam,
}

/// Serialises a model.
pub fn encode_model(model: &MlpModel) -> Vec<u8> {
    let (state, adam_step) = match model.optimizer_state() {
        OptimizerState::Sgd { .. } => (StateKind::Sgd, 0),
        OptimizerState::Adam { step, .. } => (StateKind::Adam, *step),
    };
    let header = Header {
        config: model.config().clone(),
        epochs_trained: model.epochs_trained(),
        state,
        adam_step,
    };
    let json = serde_json::to_vec(&header).expect("header serialises");
    let params = model.parameters();
    let mut out = Vec::with_capacity(32 + json.len() + params.len() * 24);
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.0.to_le_bytes());
    out.extend_from_slice(&CHECKPOINT_VERSION.1.to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&(params.len() as u64).to_le_bytes());
    push_f64s(&mut out, params);
    match model.optimizer_state() {
        OptimizerState::Sgd { velocity } => push_f64s(&mut out, velocity),
        OptimizerState::Adam { m, v, .. } => {
            push_f64s(&mut out, m);
            push_f64s(&mut out, v);
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

/// Parses a checkpoint; `path` only labels errors.
pub fn decode_model(bytes: &[u8], path: &Path) -> Result<MlpModel> {
    let mut r = Reader::new(bytes, path);
    if r.take(8)? != CHECKPOINT_MAGIC {
        return Err(Error::format(path, 0, "not a model checkpoint (bad magic)"));
    }
    let major = r.u16()?;
    if major != CHECKPOINT_VERSION.0 {
        return Err(Error::format(path, 8, format!("unsupported checkpoint major version {major}")));
    }
    let body = verify_crc(bytes, path)?;
    let mut r = Reader::new(body, path);
    r.take(12)?;
    let json_len = r.u32()? as usize;
    let json_at = r.position();
    let header: Header =
        serde_json::from_slice(r.take(json_len)?).map_err(|e| Error::format(path, json_at, e.to_string()))?;
    let n = r.u64()? as usize;
    let params = r.f64s(n)?;
    let state = match header.state {
        StateKind::Sgd => OptimizerState::Sgd { velocity: r.f64s(n)? },
        StateKind::Adam => OptimizerState::Adam {
            m: r.f64s(n)?,
            v: r.f64s(n)?,
            step: header.adam_step,
        },
    };
    if !r.is_at_end() {
        return Err(Error::format(path, r.position(), "trailing bytes after optimiser state"));
    }
    Ok(MlpModel::from_parts(header.config, params, state, header.epochs_trained)?)
}

/// Writes a checkpoint.
pub fn save_model(path: &Path, model: &MlpModel) -> Result<()> {
    write_bytes(path, &encode_model(model))
}

/// Reads a checkpoint.
pub fn load_model(path: &Path) -> Result<MlpModel> {
    decode_model(&read_bytes(path)?, path)
}
