//! Numeric tables and CSV ingestion.

use std::path::Path;

use crate::error::{Error, Result};

/// A rectangular numeric table with optional binary labels (`true` marks an
/// outlier).
#[derive(Clone, Debug, PartialEq)]
pub struct DataTable {
    column_names: Vec<String>,
    rows: Vec<Vec<f64>>,
    labels: Option<Vec<bool>>,
    record_ids: Vec<String>,
}

impl DataTable {
    pub fn new(
        column_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Option<Vec<bool>>,
        record_ids: Vec<String>,
    ) -> Result<Self> {
        for row in &rows {
            if row.len() != column_names.len() {
                return Err(Error::LengthMismatch {
                    what: "table row",
                    expected: column_names.len(),
                    found: row.len(),
                });
            }
        }
        if let Some(labels) = &labels {
            if labels.len() != rows.len() {
                return Err(Error::LengthMismatch {
                    what: "labels",
                    expected: rows.len(),
                    found: labels.len(),
                });
            }
        }
        if record_ids.len() != rows.len() {
            return Err(Error::LengthMismatch {
                what: "record ids",
                expected: rows.len(),
                found: record_ids.len(),
            });
        }
        Ok(Self {
            column_names,
            rows,
            labels,
            record_ids,
        })
    }

    /// Table whose record ids are the row positions.
    pub fn from_rows(
        column_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Option<Vec<bool>>,
    ) -> Result<Self> {
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        Self::new(column_names, rows, labels, ids)
    }

    /// Reads a headed, comma-separated file. `label_column` is removed from
    /// the attributes and parsed as `0`/`1`; `id_column`, when given, supplies
    /// record ids (otherwise the 0-based data row index is used).
    pub fn read_csv<P: AsRef<Path>>(
        path: P,
        label_column: Option<&str>,
        id_column: Option<&str>,
    ) -> Result<Self> {
        let path = path.as_ref();
        let shown = path.display().to_string();
        let file = std::fs::File::open(path).map_err(|e| Error::Input {
            path: shown.clone(),
            message: e.to_string(),
        })?;
        Self::read_csv_from(file, &shown, label_column, id_column)
    }

    pub fn read_csv_from<R: std::io::Read>(
        reader: R,
        source: &str,
        label_column: Option<&str>,
        id_column: Option<&str>,
    ) -> Result<Self> {
        let input_err = |message: String| Error::Input {
            path: source.to_string(),
            message,
        };
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| input_err(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let find = |name: &str| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| input_err(format!("no column named {name:?}")))
        };
        let label_idx = label_column.map(find).transpose()?;
        let id_idx = id_column.map(find).transpose()?;
        let attr_idx: Vec<usize> = (0..header.len())
            .filter(|&i| Some(i) != label_idx && Some(i) != id_idx)
            .collect();
        if attr_idx.is_empty() {
            return Err(input_err("no attribute columns".into()));
        }

        let mut rows = Vec::new();
        let mut labels = label_idx.map(|_| Vec::new());
        let mut ids = Vec::new();
        for (n, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| input_err(e.to_string()))?;
            let line = record.position().map_or(n + 2, |p| p.line() as usize);
            let cell = |i: usize| record.get(i).unwrap_or("");
            let parse_err = |i: usize| Error::Parse {
                path: source.to_string(),
                row: line,
                column: header[i].clone(),
                value: cell(i).to_string(),
            };
            let row = attr_idx
                .iter()
                .map(|&i| cell(i).parse::<f64>().map_err(|_| parse_err(i)))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
            if let (Some(li), Some(labels)) = (label_idx, labels.as_mut()) {
                labels.push(match cell(li) {
                    "0" => false,
                    "1" => true,
                    _ => return Err(parse_err(li)),
                });
            }
            ids.push(match id_idx {
                Some(ii) => cell(ii).to_string(),
                None => n.to_string(),
            });
        }
        let names = attr_idx.iter().map(|&i| header[i].clone()).collect();
        Self::new(names, rows, labels, ids)
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> Option<&[bool]> {
        self.labels.as_deref()
    }

    pub fn record_ids(&self) -> &[String] {
        &self.record_ids
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_columns(&self) -> usize {
        self.column_names.len()
    }

    pub fn row_index(&self, id: &str) -> Option<usize> {
        self.record_ids.iter().position(|r| r == id)
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            column_names: self.column_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
            record_ids: indices
                .iter()
                .map(|&i| self.record_ids[i].clone())
                .collect(),
        }
    }
}
