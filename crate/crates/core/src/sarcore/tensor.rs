//! Flat little-endian `f32` tensors with a JSON sidecar (`<path>.meta`)
//! carrying `dtype`, `shape` and product-specific keys.

use std::fs;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Result, SarError};
use crate::sarcore::io::{read_json, sidecar_path, write_json};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
    pub meta: Map<String, Value>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if shape.is_empty() || n != data.len() {
            return Err(SarError::DimensionMismatch(format!(
                "shape {shape:?} does not match {} values",
                data.len()
            )));
        }
        Ok(Tensor {
            shape,
            data,
            meta: Map::new(),
        })
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }
}

pub fn encode_f32(data: &[f32]) -> Vec<u8> {
    data.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn write_tensor(t: &Tensor, path: &Path) -> Result<()> {
    let mut meta = t.meta.clone();
    meta.insert("dtype".into(), "f32".into());
    meta.insert("byte_order".into(), "little".into());
    meta.insert("layout".into(), "row-major".into());
    meta.insert("shape".into(), Value::from(t.shape.clone()));
    fs::write(path, encode_f32(&t.data)).map_err(|e| SarError::io(path, e))?;
    write_json(&sidecar_path(path), &meta)
}

pub fn read_tensor(path: &Path) -> Result<Tensor> {
    let bytes = fs::read(path).map_err(|e| SarError::io(path, e))?;
    let meta = read_json(&sidecar_path(path))?;
    if meta.get("dtype").and_then(Value::as_str) != Some("f32") {
        return Err(SarError::MalformedMetadata("tensor dtype must be \"f32\"".into()));
    }
    let shape: Vec<usize> = meta
        .get("shape")
        .and_then(Value::as_array)
        .and_then(|a| a.iter().map(|v| v.as_u64().map(|x| x as usize)).collect())
        .ok_or_else(|| SarError::MalformedMetadata("tensor shape missing or invalid".into()))?;
    let n: u64 = shape.iter().map(|&d| d as u64).product();
    if n * 4 != bytes.len() as u64 {
        return Err(SarError::PayloadSizeMismatch {
            expected: n * 4,
            found: bytes.len() as u64,
        });
    }
    let data = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let mut t = Tensor::new(shape, data)?;
    t.meta = meta;
    Ok(t)
}
