//! Dataset descriptors and raw velocity files.
//!
//! A raw file holds `nx·ny·nz` vertices, x fastest, each with three interleaved velocity
//! components in the descriptor's component order, precision and byte order.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use vortex_core::fields::{AxisRoles, FieldError, GridMeta, VelocityField};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: malformed descriptor: {source}")]
    Descriptor { path: PathBuf, source: serde_json::Error },
    #[error("raw file {path} has {actual} bytes, expected {expected} (= {nx}·{ny}·{nz}·3·{bytes})", nx = dims[0], ny = dims[1], nz = dims[2])]
    SizeMismatch { path: PathBuf, expected: u64, actual: u64, dims: [usize; 3], bytes: usize },
    #[error("non-finite velocity component at value index {index} (vertex {vertex})")]
    NonFinite { index: usize, vertex: usize },
    #[error("component order must be a permutation of 0,1,2, got {0:?}")]
    ComponentOrder([usize; 3]),
    #[error(transparent)]
    Field(#[from] FieldError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Float32,
    Float64,
}

impl Precision {
    pub fn bytes(self) -> usize {
        match self {
            Precision::Float32 => 4,
            Precision::Float64 => 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ByteOrder {
    #[default]
    Little,
    Big,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetDescriptor {
    /// Raw velocity file; relative paths resolve against the descriptor's directory.
    pub path: PathBuf,
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    #[serde(default)]
    pub origin: [f64; 3],
    /// Velocity axis stored in each slot of a vertex record; `[0, 1, 2]` is (u, v, w).
    #[serde(default = "identity_order")]
    pub component_order: [usize; 3],
    #[serde(default)]
    pub precision: Precision,
    #[serde(default)]
    pub byte_order: ByteOrder,
    #[serde(default)]
    pub axis_roles: AxisRoles,
}

fn identity_order() -> [usize; 3] {
    [0, 1, 2]
}

impl DatasetDescriptor {
    pub fn read(path: &Path) -> Result<Self, IoError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut d: DatasetDescriptor =
            serde_json::from_str(&text).map_err(|source| IoError::Descriptor { path: path.to_path_buf(), source })?;
        if d.path.is_relative() {
            if let Some(dir) = path.parent() {
                d.path = dir.join(&d.path);
            }
        }
        Ok(d)
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        let text = serde_json::to_string_pretty(self).expect("descriptor serialises");
        fs::write(path, text + "\n").map_err(io_err(path))
    }

    pub fn meta(&self) -> Result<GridMeta, IoError> {
        let mut sorted = self.component_order;
        sorted.sort_unstable();
        if sorted != [0, 1, 2] {
            return Err(IoError::ComponentOrder(self.component_order));
        }
        Ok(GridMeta::new(self.dims, self.spacing, self.origin, self.axis_roles)?)
    }

    pub fn expected_bytes(&self) -> u64 {
        self.dims.iter().map(|&d| d as u64).product::<u64>() * 3 * self.precision.bytes() as u64
    }

    /// SHA-256 over the descriptor's layout fields (not its path) and the raw file bytes.
    pub fn digest(&self) -> Result<String, IoError> {
        let mut layout = self.clone();
        layout.path = PathBuf::new();
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&layout).expect("descriptor serialises"));
        h.update(fs::read(&self.path).map_err(io_err(&self.path))?);
        Ok(hex::encode(h.finalize()))
    }
}

fn decode(bytes: &[u8], precision: Precision, order: ByteOrder) -> f64 {
    match (precision, order) {
        (Precision::Float32, ByteOrder::Little) => f32::from_le_bytes(bytes.try_into().unwrap()) as f64,
        (Precision::Float32, ByteOrder::Big) => f32::from_be_bytes(bytes.try_into().unwrap()) as f64,
        (Precision::Float64, ByteOrder::Little) => f64::from_le_bytes(bytes.try_into().unwrap()),
        (Precision::Float64, ByteOrder::Big) => f64::from_be_bytes(bytes.try_into().unwrap()),
    }
}

fn encode(v: f64, precision: Precision, order: ByteOrder, out: &mut Vec<u8>) {
    match (precision, order) {
        (Precision::Float32, ByteOrder::Little) => out.extend((v as f32).to_le_bytes()),
        (Precision::Float32, ByteOrder::Big) => out.extend((v as f32).to_be_bytes()),
        (Precision::Float64, ByteOrder::Little) => out.extend(v.to_le_bytes()),
        (Precision::Float64, ByteOrder::Big) => out.extend(v.to_be_bytes()),
    }
}

/// Decodes a raw velocity buffer laid out as the descriptor says.
pub fn decode_field(desc: &DatasetDescriptor, bytes: &[u8]) -> Result<(GridMeta, VelocityField), IoError> {
    let meta = desc.meta()?;
    if bytes.len() as u64 != desc.expected_bytes() {
        return Err(IoError::SizeMismatch {
            path: desc.path.clone(),
            expected: desc.expected_bytes(),
            actual: bytes.len() as u64,
            dims: desc.dims,
            bytes: desc.precision.bytes(),
        });
    }
    let w = desc.precision.bytes();
    let mut data = Vec::with_capacity(meta.vertex_count());
    for (vertex, rec) in bytes.chunks_exact(3 * w).enumerate() {
        let mut v = [0.0; 3];
        for slot in 0..3 {
            let x = decode(&rec[slot * w..(slot + 1) * w], desc.precision, desc.byte_order);
            if !x.is_finite() {
                return Err(IoError::NonFinite { index: vertex * 3 + slot, vertex });
            }
            v[desc.component_order[slot]] = x;
        }
        data.push(v);
    }
    Ok((meta, VelocityField::new(data)))
}

pub fn load_field(desc: &DatasetDescriptor) -> Result<(GridMeta, VelocityField), IoError> {
    let bytes = fs::read(&desc.path).map_err(io_err(&desc.path))?;
    decode_field(desc, &bytes)
}

pub fn encode_field(desc: &DatasetDescriptor, field: &VelocityField) -> Vec<u8> {
    let mut out = Vec::with_capacity(desc.expected_bytes() as usize);
    for v in &field.data {
        for slot in 0..3 {
            encode(v[desc.component_order[slot]], desc.precision, desc.byte_order, &mut out);
        }
    }
    out
}

/// Writes the raw file at `desc.path`.
pub fn write_field(desc: &DatasetDescriptor, field: &VelocityField) -> Result<(), IoError> {
    fs::write(&desc.path, encode_field(desc, field)).map_err(io_err(&desc.path))
}
