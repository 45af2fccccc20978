//! Rectangular tabular data.
//!
//! Values are stored row-major as `f64`. Categorical columns hold the index of
//! the level in the column's level list, so every predictor sees a plain
//! numeric row.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kind of a column, with the level list for categoricals.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnKind {
    Numeric,
    Categorical { levels: Vec<String> },
}

impl ColumnKind {
    pub fn is_categorical(&self) -> bool {
        matches!(self, ColumnKind::Categorical { .. })
    }

    pub fn levels(&self) -> Option<&[String]> {
        match self {
            ColumnKind::Numeric => None,
            ColumnKind::Categorical { levels } => Some(levels),
        }
    }
}

/// Declared kind in a schema sidecar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeclaredKind {
    Numeric,
    Categorical,
}

/// Optional column-kind map, `{"column": "numeric" | "categorical"}`.
pub type Schema = BTreeMap<String, DeclaredKind>;

pub fn read_schema(path: impl AsRef<Path>) -> Result<Schema> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Schema(e.to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    kinds: Vec<ColumnKind>,
    n_rows: usize,
    values: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset from row-major values.
    pub fn from_rows(
        names: Vec<String>,
        kinds: Vec<ColumnKind>,
        rows: &[Vec<f64>],
    ) -> Result<Self> {
        if names.len() != kinds.len() {
            return Err(Error::LengthMismatch {
                expected: names.len(),
                found: kinds.len(),
            });
        }
        let p = names.len();
        let mut values = Vec::with_capacity(rows.len() * p);
        for row in rows {
            if row.len() != p {
                return Err(Error::LengthMismatch {
                    expected: p,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::from_flat(names, kinds, values)
    }

    /// Builds a dataset from a flat row-major buffer, validating every cell.
    pub fn from_flat(names: Vec<String>, kinds: Vec<ColumnKind>, values: Vec<f64>) -> Result<Self> {
        let p = names.len();
        if p == 0 || values.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if kinds.len() != p {
            return Err(Error::LengthMismatch {
                expected: p,
                found: kinds.len(),
            });
        }
        if !values.len().is_multiple_of(p) {
            return Err(Error::LengthMismatch {
                expected: p * (values.len() / p + 1),
                found: values.len(),
            });
        }
        let n_rows = values.len() / p;
        for (idx, &v) in values.iter().enumerate() {
            let col = idx % p;
            if !v.is_finite() {
                return Err(Error::MissingValue {
                    line: (idx / p) as u64 + 1,
                    column: names[col].clone(),
                });
            }
            if let ColumnKind::Categorical { levels } = &kinds[col] {
                if v < 0.0 || v.fract() != 0.0 || v as usize >= levels.len() {
                    return Err(Error::Domain(format!(
                        "value {v} in categorical column `{}` is not a level index",
                        names[col]
                    )));
                }
            }
        }
        Ok(Dataset {
            names,
            kinds,
            n_rows,
            values,
        })
    }

    /// All-numeric dataset from rows.
    pub fn numeric(names: &[&str], rows: &[Vec<f64>]) -> Result<Self> {
        let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let kinds = vec![ColumnKind::Numeric; names.len()];
        Self::from_rows(names, kinds, rows)
    }

    /// All-numeric dataset from columns of equal length.
    pub fn from_columns(names: &[&str], columns: &[Vec<f64>]) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        if let Some(c) = columns.iter().find(|c| c.len() != n) {
            return Err(Error::LengthMismatch {
                expected: n,
                found: c.len(),
            });
        }
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| columns.iter().map(|c| c[i]).collect())
            .collect();
        Self::numeric(names, &rows)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, j: usize) -> &str {
        &self.names[j]
    }

    pub fn kinds(&self) -> &[ColumnKind] {
        &self.kinds
    }

    pub fn kind(&self, j: usize) -> &ColumnKind {
        &self.kinds[j]
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_cols();
        &self.values[i * p..(i + 1) * p]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_cols())
    }

    /// Row-major view of the whole table.
    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_cols() + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn check_feature(&self, j: usize) -> Result<()> {
        if j >= self.n_cols() {
            return Err(Error::FeatureOutOfRange {
                index: j,
                p: self.n_cols(),
            });
        }
        Ok(())
    }

    /// Sorted distinct values of a column.
    pub fn unique_values(&self, j: usize) -> Vec<f64> {
        let mut col = self.column(j);
        col.sort_by(f64::total_cmp);
        col.dedup();
        col
    }

    /// Keeps only the listed rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let p = self.n_cols();
        let mut values = Vec::with_capacity(indices.len() * p);
        for &i in indices {
            if i >= self.n_rows {
                return Err(Error::invalid(format!(
                    "row index {i} out of range for {} rows",
                    self.n_rows
                )));
            }
            values.extend_from_slice(self.row(i));
        }
        Self::from_flat(self.names.clone(), self.kinds.clone(), values)
    }

    /// Splits a named column off as the response vector.
    ///
    /// A categorical target contributes its level indices.
    pub fn split_target(&self, name: &str) -> Result<(Dataset, Vec<f64>)> {
        let t = self.column_index(name)?;
        let y = self.column(t);
        let keep: Vec<usize> = (0..self.n_cols()).filter(|&j| j != t).collect();
        let names = keep.iter().map(|&j| self.names[j].clone()).collect();
        let kinds = keep.iter().map(|&j| self.kinds[j].clone()).collect();
        let values = self
            .rows()
            .flat_map(|r| keep.iter().map(move |&j| r[j]))
            .collect();
        Ok((Self::from_flat(names, kinds, values)?, y))
    }

    /// Renders a cell back to text (level label for categoricals).
    pub fn display_value(&self, j: usize, v: f64) -> String {
        match &self.kinds[j] {
            ColumnKind::Categorical { levels } => levels
                .get(v as usize)
                .cloned()
                .unwrap_or_else(|| v.to_string()),
            ColumnKind::Numeric => crate::output::format_f64(v),
        }
    }

    /// Writes the dataset as CSV with level labels for categoricals.
    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.names)
            .map_err(|e| Error::Csv(e.to_string()))?;
        for row in self.rows() {
            let rec: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(j, &v)| self.display_value(j, v))
                .collect();
            w.write_record(&rec)
                .map_err(|e| Error::Csv(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Csv(e.to_string()))
    }
}

/// Loads a CSV file with a mandatory header row.
///
/// Columns listed in `schema` take the declared kind. Other columns are
/// numeric when every cell parses as a real number, categorical otherwise.
/// Categorical levels are recorded in order of first appearance.
pub fn load_dataset(path: impl AsRef<Path>, schema: Option<&Schema>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, schema)
}

pub fn parse_csv(text: &str, schema: Option<&Schema>) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::EmptyDataset);
    }
    if let Some(schema) = schema {
        if let Some(unknown) = schema.keys().find(|k| !header.contains(k)) {
            return Err(Error::UnknownColumn(unknown.clone()));
        }
    }

    let p = header.len();
    let mut cells: Vec<Vec<String>> = Vec::new();
    let mut lines: Vec<u64> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        let line = record.position().map_or(0, |pos| pos.line());
        if record.len() != p {
            return Err(Error::RaggedRow {
                line,
                expected: p,
                found: record.len(),
            });
        }
        let row: Vec<String> = record.iter().map(|s| s.trim().to_string()).collect();
        if let Some(j) = row.iter().position(String::is_empty) {
            return Err(Error::MissingValue {
                line,
                column: header[j].clone(),
            });
        }
        cells.push(row);
        lines.push(line);
    }
    if cells.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let mut kinds = Vec::with_capacity(p);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(p);
    for (j, name) in header.iter().enumerate() {
        let declared = schema.and_then(|s| s.get(name)).copied();
        let numeric = match declared {
            Some(DeclaredKind::Numeric) => true,
            Some(DeclaredKind::Categorical) => false,
            None => cells.iter().all(|r| parse_real(&r[j]).is_some()),
        };
        if numeric {
            let mut col = Vec::with_capacity(cells.len());
            for (r, &line) in cells.iter().zip(&lines) {
                let v = parse_real(&r[j]).ok_or_else(|| Error::UnparseableCell {
                    line,
                    column: name.clone(),
                    value: r[j].clone(),
                })?;
                col.push(v);
            }
            kinds.push(ColumnKind::Numeric);
            columns.push(col);
        } else {
            let mut levels: Vec<String> = Vec::new();
            let mut col = Vec::with_capacity(cells.len());
            for r in &cells {
                let idx = match levels.iter().position(|l| *l == r[j]) {
                    Some(idx) => idx,
                    None => {
                        levels.push(r[j].clone());
                        levels.len() - 1
                    }
                };
                col.push(idx as f64);
            }
            kinds.push(ColumnKind::Categorical { levels });
            columns.push(col);
        }
    }

    let n = cells.len();
    let mut values = Vec::with_capacity(n * p);
    for i in 0..n {
        values.extend(columns.iter().map(|c| c[i]));
    }
    let ds = Dataset::from_flat(header, kinds, values)?;
    debug_assert!(ds.rows().all(|r| r.len() == p));
    Ok(ds)
}

fn parse_real(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}
