//! JSON file formats: `.mfield` documents for single fields and path
//! documents holding a time series of inline fields.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{GridSpec, MetricPath, TensorField};
use crate::spd::{packed_len, SymTensorPoint};

pub const FORMAT_VERSION: u32 = 1;

/// On-disk form of a tensor field; `data` holds the upper triangles of the
/// cells in row-major cell order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDoc {
    pub version: u32,
    pub n: usize,
    pub dims: Vec<usize>,
    pub cell_measure: f64,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathDoc {
    pub version: u32,
    pub times: Vec<f64>,
    pub fields: Vec<FieldDoc>,
}

fn check_version(v: u32) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {v}")));
    }
    Ok(())
}

impl FieldDoc {
    pub fn from_field(f: &TensorField) -> Result<Self> {
        let mut data = Vec::with_capacity(f.cells.len() * packed_len(f.grid.n));
        for (i, c) in f.cells.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::Format(format!("cell {i} has non-finite entries")));
            }
            data.extend_from_slice(c.upper());
        }
        Ok(Self {
            version: FORMAT_VERSION,
            n: f.grid.n,
            dims: f.grid.dims.clone(),
            cell_measure: f.grid.cell_measure,
            data,
        })
    }

    pub fn to_field(&self) -> Result<TensorField> {
        check_version(self.version)?;
        let grid = GridSpec::new(self.n, self.dims.clone(), self.cell_measure).map_err(|e| Error::Format(e.to_string()))?;
        let m = packed_len(self.n);
        if self.data.len() != grid.cell_count() * m {
            return Err(Error::Format(format!(
                "expected {} numbers, found {}",
                grid.cell_count() * m,
                self.data.len()
            )));
        }
        let cells = self
            .data
            .chunks_exact(m)
            .map(|c| SymTensorPoint::from_upper(self.n, c))
            .collect::<Result<Vec<_>>>()?;
        TensorField::new(&grid, cells)
    }
}

impl PathDoc {
    pub fn from_path(p: &MetricPath) -> Result<Self> {
        Ok(Self {
            version: FORMAT_VERSION,
            times: p.times.clone(),
            fields: p.fields.iter().map(FieldDoc::from_field).collect::<Result<_>>()?,
        })
    }

    pub fn to_path(&self) -> Result<MetricPath> {
        check_version(self.version)?;
        let fields = self.fields.iter().map(FieldDoc::to_field).collect::<Result<Vec<_>>>()?;
        MetricPath::new(self.times.clone(), fields)
    }
}

pub fn field_to_string(f: &TensorField) -> Result<String> {
    Ok(serde_json::to_string(&FieldDoc::from_field(f)?)? + "\n")
}

pub fn field_from_str(s: &str) -> Result<TensorField> {
    serde_json::from_str::<FieldDoc>(s)?.to_field()
}

pub fn path_to_string(p: &MetricPath) -> Result<String> {
    Ok(serde_json::to_string(&PathDoc::from_path(p)?)? + "\n")
}

pub fn path_from_str(s: &str) -> Result<MetricPath> {
    serde_json::from_str::<PathDoc>(s)?.to_path()
}

pub fn write_field(path: impl AsRef<Path>, f: &TensorField) -> Result<()> {
    fs::write(path, field_to_string(f)?)?;
    Ok(())
}

pub fn read_field(path: impl AsRef<Path>) -> Result<TensorField> {
    field_from_str(&fs::read_to_string(path)?)
}

pub fn write_path(path: impl AsRef<Path>, p: &MetricPath) -> Result<()> {
    fs::write(path, path_to_string(p)?)?;
    Ok(())
}

pub fn read_path(path: impl AsRef<Path>) -> Result<MetricPath> {
    path_from_str(&fs::read_to_string(path)?)
}

/// Pretty JSON of any report, newline terminated.
pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}
