//! Real streams from delimited text files.

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::TabularChunk;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvStreamSpec {
    pub path: std::path::PathBuf,
    pub chunk_size: usize,
    pub label_column: LabelColumn,
    /// Label value mapped to class 1.
    pub positive_class: String,
    /// When set, every label must be `positive_class` or one of these.
    #[serde(default)]
    pub negative_classes: Option<Vec<String>>,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
}

fn default_delimiter() -> char {
    ','
}

/// Reads a labeled CSV file into full chunks in file order. The trailing
/// partial chunk is dropped.
pub fn load_csv_stream(spec: &CsvStreamSpec) -> Result<Vec<TabularChunk>> {
    if spec.chunk_size == 0 {
        return Err(Error::InvalidConfig("chunk_size must be positive".into()));
    }
    if !spec.delimiter.is_ascii() {
        return Err(Error::InvalidConfig("delimiter must be ASCII".into()));
    }
    let path: &Path = &spec.path;
    let mut reader = ::csv::ReaderBuilder::new()
        .delimiter(spec.delimiter as u8)
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let label_idx = match &spec.label_column {
        LabelColumn::Index(i) if *i < headers.len() => *i,
        LabelColumn::Index(i) => {
            return Err(Error::InvalidConfig(format!(
                "label column {i} out of range ({} columns)",
                headers.len()
            )))
        }
        LabelColumn::Name(name) => headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::InvalidConfig(format!("no column named `{name}` in {}", path.display()))
        })?,
    };
    let n_features = headers.len() - 1;
    if n_features == 0 {
        return Err(Error::InvalidConfig("file has no feature columns".into()));
    }

    let mut chunks = Vec::new();
    let mut values: Vec<f64> = Vec::with_capacity(spec.chunk_size * n_features);
    let mut labels: Vec<u8> = Vec::with_capacity(spec.chunk_size);
    for (i, record) in reader.records().enumerate() {
        // Data rows are numbered from 1, after the header.
        let row = i + 1;
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.len() != headers.len() {
            return Err(Error::Parse {
                row,
                column: "*".into(),
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if j == label_idx {
                labels.push(binarize(cell, spec).map_err(|message| Error::Parse {
                    row,
                    column: headers[j].clone(),
                    message,
                })?);
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: headers[j].clone(),
                message: format!("non-numeric value `{cell}`"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: headers[j].clone(),
                    message: format!("non-finite value `{cell}`"),
                });
            }
            values.push(v);
        }
        if labels.len() == spec.chunk_size {
            let features = Array2::from_shape_vec((spec.chunk_size, n_features), std::mem::take(&mut values))
                .expect("row-major buffer matches chunk shape");
            chunks.push(TabularChunk::new(chunks.len(), features, std::mem::take(&mut labels))?);
        }
    }
    Ok(chunks)
}

fn binarize(cell: &str, spec: &CsvStreamSpec) -> std::result::Result<u8, String> {
    if cell == spec.positive_class {
        return Ok(1);
    }
    match &spec.negative_classes {
        Some(neg) if !neg.iter().any(|n| n == cell) => Err(format!("unexpected label `{cell}`")),
        _ => Ok(0),
    }
}

fn csv_error(path: &Path, e: ::csv::Error) -> Error {
    match e.kind() {
        ::csv::ErrorKind::Io(_) => match e.into_kind() {
            ::csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        },
        _ => {
            let row = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::Parse {
                row,
                column: "*".into(),
                message: e.to_string(),
            }
        }
    }
}
