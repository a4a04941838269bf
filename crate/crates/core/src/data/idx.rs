//! The IDX container used by MNIST: big-endian magic and dimensions followed
//! by raw unsigned bytes.

use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Magic number of a rank-3 unsigned-byte IDX file (images).
pub const IMAGES_MAGIC: u32 = 0x0000_0803;
/// Magic number of a rank-1 unsigned-byte IDX file (labels).
pub const LABELS_MAGIC: u32 = 0x0000_0801;

/// Decoded rank-3 image payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    /// Number of images.
    pub count: usize,
    /// Image height.
    pub rows: usize,
    /// Image width.
    pub cols: usize,
    /// `count * rows * cols` pixels, image-major.
    pub pixels: Vec<u8>,
}

fn format_err(offset: usize, message: impl Into<alloc::string::String>) -> Error {
    Error::Format {
        offset,
        message: message.into(),
    }
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| format_err(bytes.len(), format!("header truncated, need 4 bytes at {offset}")))
}

fn expect_magic(bytes: &[u8], magic: u32) -> Result<()> {
    let found = read_u32(bytes, 0)?;
    if found != magic {
        return Err(format_err(0, format!("bad magic 0x{found:08x}, expected 0x{magic:08x}")));
    }
    Ok(())
}

fn payload(bytes: &[u8], header: usize, expected: usize, what: &str) -> Result<Vec<u8>> {
    let available = bytes.len() - header;
    if available < expected {
        return Err(format_err(
            bytes.len(),
            format!("{what} payload truncated: {available} of {expected} bytes present"),
        ));
    }
    if available > expected {
        return Err(format_err(
            header + expected,
            format!("{} trailing bytes after {what} payload", available - expected),
        ));
    }
    Ok(bytes[header..].to_vec())
}

/// Parses an images file.
pub fn parse_images(bytes: &[u8]) -> Result<IdxImages> {
    expect_magic(bytes, IMAGES_MAGIC)?;
    let count = read_u32(bytes, 4)? as usize;
    let rows = read_u32(bytes, 8)? as usize;
    let cols = read_u32(bytes, 12)? as usize;
    let expected = count
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .ok_or_else(|| format_err(4, "image dimensions overflow"))?;
    let pixels = payload(bytes, 16, expected, "image")?;
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels,
    })
}

/// Parses a labels file.
pub fn parse_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    expect_magic(bytes, LABELS_MAGIC)?;
    let count = read_u32(bytes, 4)? as usize;
    payload(bytes, 8, count, "label")
}

/// Serialises images back to IDX bytes.
pub fn encode_images(images: &IdxImages) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    for v in [IMAGES_MAGIC, images.count as u32, images.rows as u32, images.cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(&images.pixels);
    out
}

/// Serialises labels back to IDX bytes.
pub fn encode_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}
