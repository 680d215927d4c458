//! The `GOLA1` container: 4-byte magic, little-endian u32 version,
//! little-endian u64 header length, a UTF-8 JSON header describing the
//! tensor layout, then a packed payload of row-major little-endian f32
//! values at the offsets the header states.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::adapter::AdapterPair;
use crate::error::{Error, Result};
use crate::io::{atomic_write, read_bytes};

pub const CONTAINER_MAGIC: [u8; 4] = *b"GOLA";
pub const CONTAINER_VERSION: u32 = 1;

/// Byte count of magic + version + header length.
const PRELUDE_LEN: usize = 16;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: [usize; 2],
    dtype: String,
    offset: u64,
    length_bytes: u64,
}

/// Adapter-level facts carried alongside the raw tensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainerMetadata {
    pub r: usize,
    pub scale: f64,
    pub layer_name: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ContainerHeader {
    tensors: Vec<TensorEntry>,
    metadata: ContainerMetadata,
}

/// One tensor as stored: a name plus its f32 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub values: DMatrix<f32>,
}

/// In-memory image of a container file.
#[derive(Debug, Clone, PartialEq)]
pub struct Container {
    pub tensors: Vec<NamedTensor>,
    pub metadata: ContainerMetadata,
}

fn tensor_byte_len(t: &NamedTensor) -> Result<u64> {
    (t.values.nrows() as u64)
        .checked_mul(t.values.ncols() as u64)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| {
            Error::Validation(format!(
                "tensor {} is too large to serialize: {} x {}",
                t.name,
                t.values.nrows(),
                t.values.ncols()
            ))
        })
}

/// Serialize `container` to `path`, laying tensors out back to back.
pub fn write_container(path: &Path, container: &Container) -> Result<()> {
    let mut entries = Vec::with_capacity(container.tensors.len());
    let mut payload = Vec::new();
    let mut offset = 0u64;
    for t in &container.tensors {
        let length_bytes = tensor_byte_len(t)?;
        entries.push(TensorEntry {
            name: t.name.clone(),
            shape: [t.values.nrows(), t.values.ncols()],
            dtype: "f32".into(),
            offset,
            length_bytes,
        });
        for i in 0..t.values.nrows() {
            for j in 0..t.values.ncols() {
                payload.extend_from_slice(&t.values[(i, j)].to_le_bytes());
            }
        }
        offset += length_bytes;
    }
    let header = serde_json::to_vec(&ContainerHeader {
        tensors: entries,
        metadata: container.metadata.clone(),
    })?;

    let mut bytes = Vec::with_capacity(PRELUDE_LEN + header.len() + payload.len());
    bytes.extend_from_slice(&CONTAINER_MAGIC);
    bytes.extend_from_slice(&CONTAINER_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(header.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&header);
    bytes.extend_from_slice(&payload);
    atomic_write(path, &bytes)
}

fn corrupt(msg: String) -> Error {
    Error::Container(msg)
}

/// Parse a container file, validating magic, version, bounds, and layout.
pub fn read_container(path: &Path) -> Result<Container> {
    let bytes = read_bytes(path)?;
    let shown = path.display();
    if bytes.len() < PRELUDE_LEN {
        return Err(corrupt(format!(
            "truncated container {shown}: {} bytes is shorter than the {PRELUDE_LEN}-byte prelude",
            bytes.len()
        )));
    }
    if bytes[..4] != CONTAINER_MAGIC {
        return Err(corrupt(format!(
            "bad magic in {shown}: expected \"GOLA\", found {:02x?}",
            &bytes[..4]
        )));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != CONTAINER_VERSION {
        return Err(corrupt(format!(
            "unsupported container version {version} in {shown}; this build reads version {CONTAINER_VERSION}"
        )));
    }
    let header_len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let payload_start = PRELUDE_LEN.checked_add(header_len).ok_or_else(|| {
        corrupt(format!("truncated container {shown}: header length overflows"))
    })?;
    if payload_start > bytes.len() {
        return Err(corrupt(format!(
            "truncated container {shown}: header claims {header_len} bytes but only {} remain",
            bytes.len() - PRELUDE_LEN
        )));
    }
    let header: ContainerHeader = serde_json::from_slice(&bytes[PRELUDE_LEN..payload_start])
        .map_err(|e| corrupt(format!("malformed container header in {shown}: {e}")))?;
    let payload = &bytes[payload_start..];

    let mut spans: Vec<(u64, u64, &str)> = Vec::with_capacity(header.tensors.len());
    let mut tensors = Vec::with_capacity(header.tensors.len());
    for entry in &header.tensors {
        if entry.dtype != "f32" {
            return Err(corrupt(format!(
                "tensor {} in {shown} has unsupported dtype {:?}; only \"f32\" is stored",
                entry.name, entry.dtype
            )));
        }
        let expected_len = (entry.shape[0] as u64)
            .checked_mul(entry.shape[1] as u64)
            .and_then(|n| n.checked_mul(4));
        if expected_len != Some(entry.length_bytes) {
            return Err(corrupt(format!(
                "tensor {} in {shown}: shape {:?} disagrees with length_bytes {}",
                entry.name, entry.shape, entry.length_bytes
            )));
        }
        let end = entry.offset.checked_add(entry.length_bytes).ok_or_else(|| {
            corrupt(format!(
                "tensor {} in {shown}: offset overflows",
                entry.name
            ))
        })?;
        if end > payload.len() as u64 {
            return Err(corrupt(format!(
                "truncated container {shown}: tensor {} ends at payload byte {end} but only {} are present",
                entry.name,
                payload.len()
            )));
        }
        spans.push((entry.offset, end, &entry.name));

        let raw = &payload[entry.offset as usize..end as usize];
        let values: Vec<f32> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        tensors.push(NamedTensor {
            name: entry.name.clone(),
            values: DMatrix::from_row_iterator(entry.shape[0], entry.shape[1], values),
        });
    }

    spans.sort();
    for pair in spans.windows(2) {
        if pair[1].0 < pair[0].1 {
            return Err(corrupt(format!(
                "overlapping tensor payloads in {shown}: {} and {}",
                pair[0].2, pair[1].2
            )));
        }
    }

    Ok(Container {
        tensors,
        metadata: header.metadata,
    })
}

/// Store an adapter as tensors `w`, `a`, `b` plus rank/scale metadata.
pub fn write_adapter(path: &Path, adapter: &AdapterPair<f32>, layer_name: &str) -> Result<()> {
    let container = Container {
        tensors: vec![
            NamedTensor {
                name: "w".into(),
                values: adapter.w().clone(),
            },
            NamedTensor {
                name: "a".into(),
                values: adapter.a().clone(),
            },
            NamedTensor {
                name: "b".into(),
                values: adapter.b().clone(),
            },
        ],
        metadata: ContainerMetadata {
            r: adapter.rank(),
            scale: adapter.scale() as f64,
            layer_name: layer_name.into(),
        },
    };
    write_container(path, &container)
}

/// Reassemble an adapter written by [`write_adapter`].
pub fn read_adapter(path: &Path) -> Result<(AdapterPair<f32>, ContainerMetadata)> {
    let container = read_container(path)?;
    let find = |name: &str| {
        container
            .tensors
            .iter()
            .find(|t| t.name == name)
            .map(|t| t.values.clone())
            .ok_or_else(|| {
                Error::Container(format!(
                    "container {} lacks tensor {name:?}",
                    path.display()
                ))
            })
    };
    let adapter = AdapterPair::new(find("w")?, find("a")?, find("b")?, container.metadata.scale as f32)?;
    if container.metadata.r != adapter.rank() {
        return Err(Error::Validation(format!(
            "metadata rank {} disagrees with tensor rank {} in {}",
            container.metadata.r,
            adapter.rank(),
            path.display()
        )));
    }
    Ok((adapter, container.metadata))
}
