//! Subspace bank files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic        8 bytes  "MASCBNK\0"
//! major, minor u16, u16
//! json length  u32
//! json         bank metadata and per-class bookkeeping (no bases)
//! bases        for each class in order, width x k f64, row-major
//! crc32        u32      over every preceding byte
//! ```
//!
//! A reader accepts any minor version of its major version; minor bumps may
//! only add JSON fields.

use std::path::Path;

use masc_core::subspace::{BankProvenance, ClassSubspace, LabelSource, SubspaceBank};
use masc_core::DenseMatrix;
use serde::{Deserialize, Serialize};

use super::{push_f64s, read_bytes, verify_crc, write_bytes, Reader};
use crate::{Error, Result};

/// File magic.
pub const BANK_MAGIC: &[u8; 8] = b"MASCBNK\0";
/// Layout version written by this build.
pub const BANK_VERSION: (u16, u16) = (1, 0);

#[derive(Serialize, Deserialize)]
struct Header {
    layer_index: usize,
    label_source: LabelSource,
    variance_threshold: f64,
    width: usize,
    provenance: BankProvenance,
    classes: Vec<ClassHeader>,
}

#[derive(Serialize, Deserialize)]
struct ClassHeader {
    class_id: usize,
    num_components: usize,
    explained_variance_ratio: f64,
    num_training_samples: usize,
    zero_variance: bool,
}

/// Serialises a bank.
pub fn encode_bank(bank: &SubspaceBank) -> Vec<u8> {
    let header = Header {
        layer_index: bank.layer_index,
        label_source: bank.label_source,
        variance_threshold: bank.variance_threshold,
        width: bank.width,
        provenance: bank.provenance.clone(),
        classes: bank
            .subspaces
            .iter()
            .map(|s| ClassHeader {
                class_id: s.class_id,
                num_components: s.num_components,
                explained_variance_ratio: s.explained_variance_ratio,
                num_training_samples: s.num_training_samples,
                zero_variance: s.zero_variance,
            })
            .collect(),
    };
    let json = serde_json::to_vec(&header).expect("header serialises");
    let mut out = Vec::new();
    out.extend_from_slice(BANK_MAGIC);
    out.extend_from_slice(&BANK_VERSION.0.to_le_bytes());
    out.extend_from_slice(&BANK_VERSION.1.to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for s in &bank.subspaces {
        push_f64s(&mut out, s.basis.as_slice());
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

/// Parses a bank; `path` only labels errors.
///
/// The magic and major version are checked first (a file of another kind
/// or major version is a format error); after that any damage, truncation
/// included, surfaces as a checksum error.
pub fn decode_bank(bytes: &[u8], path: &Path) -> Result<SubspaceBank> {
    if bytes.len() >= 8 && &bytes[..8] != BANK_MAGIC {
        return Err(Error::format(path, 0, "not a subspace bank (bad magic)"));
    }
    if bytes.len() >= 10 {
        let major = u16::from_le_bytes([bytes[8], bytes[9]]);
        if major != BANK_VERSION.0 {
            return Err(Error::format(path, 8, format!("unsupported bank major version {major}")));
        }
    }
    let body = verify_crc(bytes, path)?;
    let mut r = Reader::new(body, path);
    r.take(12)?;
    let json_len = r.u32()? as usize;
    let json_at = r.position();
    let header: Header =
        serde_json::from_slice(r.take(json_len)?).map_err(|e| Error::format(path, json_at, e.to_string()))?;
    let mut subspaces = Vec::with_capacity(header.classes.len());
    for c in header.classes {
        let at = r.position();
        let data = r.f64s(header.width * c.num_components)?;
        let basis = DenseMatrix::from_vec_finite(header.width, c.num_components, data)
            .map_err(|e| Error::format(path, at, e.to_string()))?;
        subspaces.push(ClassSubspace {
            class_id: c.class_id,
            basis,
            num_components: c.num_components,
            explained_variance_ratio: c.explained_variance_ratio,
            num_training_samples: c.num_training_samples,
            zero_variance: c.zero_variance,
        });
    }
    if !r.is_at_end() {
        return Err(Error::format(path, r.position(), "trailing bytes after the last basis"));
    }
    let bank = SubspaceBank {
        layer_index: header.layer_index,
        label_source: header.label_source,
        variance_threshold: header.variance_threshold,
        width: header.width,
        subspaces,
        provenance: header.provenance,
    };
    bank.validate().map_err(|e| Error::format(path, json_at, e.to_string()))?;
    Ok(bank)
}

/// Writes a bank.
pub fn save_bank(path: &Path, bank: &SubspaceBank) -> Result<()> {
    write_bytes(path, &encode_bank(bank))
}

/// Reads a bank.
pub fn load_bank(path: &Path) -> Result<SubspaceBank> {
    decode_bank(&read_bytes(path)?, path)
}
