//! CSV prediction batches.
//!
//! One row per prediction vector, comma separated. The first row is a header
//! when none of its cells is a number. Values are written with 17 significant
//! digits so a write/read cycle is bit-exact.

use std::io;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionBatch {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("file is empty")]
    EmptyFile,
    #[error("line {row}: expected {expected} columns, found {found}")]
    WidthMismatch { row: usize, expected: usize, found: usize },
    #[error("line {row}, column {col}: `{cell}` is not a number")]
    NonNumericCell { row: usize, col: usize, cell: String },
    #[error("line {row}, column {col}: value is not finite")]
    NonFiniteCell { row: usize, col: usize },
    #[error("rows have {found} columns, expected {expected}")]
    RowWidth { expected: usize, found: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub fn default_names(width: usize) -> Vec<String> {
    (0..width).map(|k| format!("y_{k}")).collect()
}

impl PredictionBatch {
    /// A batch with `y_<k>` column names.
    pub fn new(rows: Vec<Vec<f64>>, width: usize) -> Result<Self, BatchError> {
        if let Some(r) = rows.iter().find(|r| r.len() != width) {
            return Err(BatchError::RowWidth { expected: width, found: r.len() });
        }
        Ok(PredictionBatch { names: default_names(width), rows })
    }

    pub fn width(&self) -> usize {
        self.names.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

pub fn read_batch(path: impl AsRef<Path>, expected_width: Option<usize>) -> Result<PredictionBatch, BatchError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| BatchError::Io { path: path.display().to_string(), source })?;
    parse_batch(&text, expected_width)
}

pub fn parse_batch(text: &str, expected_width: Option<usize>) -> Result<PredictionBatch, BatchError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut names: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    let mut width = expected_width;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(BatchError::WidthMismatch { row: line, expected, found: record.len() });
        }
        if names.is_none() && rows.is_empty() && record.iter().all(|c| c.parse::<f64>().is_err()) {
            names = Some(record.iter().map(str::to_string).collect());
            continue;
        }
        let mut row = Vec::with_capacity(expected);
        for (i, cell) in record.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| BatchError::NonNumericCell {
                row: line,
                col: i + 1,
                cell: cell.to_string(),
            })?;
            if !value.is_finite() {
                return Err(BatchError::NonFiniteCell { row: line, col: i + 1 });
            }
            row.push(value);
        }
        rows.push(row);
    }
    let width = width.ok_or(BatchError::EmptyFile)?;
    if names.is_none() && rows.is_empty() {
        return Err(BatchError::EmptyFile);
    }
    Ok(PredictionBatch { names: names.unwrap_or_else(|| default_names(width)), rows })
}

pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn render_batch(batch: &PredictionBatch) -> Result<String, BatchError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(&batch.names)?;
    for row in &batch.rows {
        writer.write_record(row.iter().map(|&v| format_value(v)))?;
    }
    let bytes = writer.into_inner().map_err(|e| BatchError::Io {
        path: "<memory>".into(),
        source: e.into_error(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn write_batch(batch: &PredictionBatch, path: impl AsRef<Path>) -> Result<(), BatchError> {
    let path = path.as_ref();
    let text = render_batch(batch)?;
    std::fs::write(path, text).map_err(|source| BatchError::Io { path: path.display().to_string(), source })
}
