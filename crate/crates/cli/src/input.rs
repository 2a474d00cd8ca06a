//! CSV ingestion: a header row, numeric cells, no missing values.

use std::path::Path;

use anyhow::{bail, Context, Result};

/// Feature columns of a dataset plus an optional 0/1 label column.
#[derive(Debug, Clone)]
pub struct Table {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
    pub labels: Option<Vec<bool>>,
}

impl Table {
    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or_else(|| self.labels.as_ref().map_or(0, Vec::len), Vec::len)
    }

    pub fn require_labels(&self) -> Result<&[bool]> {
        match &self.labels {
            Some(l) => Ok(l),
            None => bail!("a label column is required (--label-col)"),
        }
    }
}

pub fn read_table(path: &Path, label_col: Option<&str>) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let headers: Vec<String> = reader
        .headers()
        .with_context(|| format!("cannot read header of {}", path.display()))?
        .iter()
        .map(str::to_owned)
        .collect();

    let label_idx = match label_col {
        Some(name) => match headers.iter().position(|h| h == name) {
            Some(i) => Some(i),
            None => bail!("label column '{name}' not found in {}", path.display()),
        },
        None => None,
    };

    let feature_idx: Vec<usize> = (0..headers.len()).filter(|&i| Some(i) != label_idx).collect();
    let mut columns = vec![Vec::new(); feature_idx.len()];
    let mut labels = label_idx.map(|_| Vec::new());

    for (row, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("malformed row {} of {}", row + 1, path.display()))?;
        if record.len() != headers.len() {
            bail!("row {} has {} fields, expected {}", row + 1, record.len(), headers.len());
        }
        for (slot, &i) in feature_idx.iter().enumerate() {
            columns[slot].push(parse_cell(&record[i], row, &headers[i])?);
        }
        if let (Some(i), Some(l)) = (label_idx, labels.as_mut()) {
            l.push(parse_label(&record[i], row, &headers[i])?);
        }
    }

    let names = feature_idx.iter().map(|&i| headers[i].clone()).collect();
    Ok(Table { names, columns, labels })
}

fn parse_cell(cell: &str, row: usize, column: &str) -> Result<f64> {
    if cell.is_empty() {
        bail!("missing value at row {} column '{column}'", row + 1);
    }
    let v: f64 = cell
        .parse()
        .with_context(|| format!("non-numeric value '{cell}' at row {} column '{column}'", row + 1))?;
    if !v.is_finite() {
        bail!("non-finite value '{cell}' at row {} column '{column}'", row + 1);
    }
    Ok(v)
}

fn parse_label(cell: &str, row: usize, column: &str) -> Result<bool> {
    match cell {
        "1" | "1.0" | "true" | "True" => Ok(true),
        "0" | "0.0" | "false" | "False" => Ok(false),
        "" => bail!("missing label at row {} column '{column}'", row + 1),
        other => bail!("label '{other}' at row {} column '{column}' is not 0/1", row + 1),
    }
}

/// Reads the `score` column of a scores file written by `score`.
pub fn read_scores(path: &Path) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let idx = reader
        .headers()?
        .iter()
        .position(|h| h == "score")
        .with_context(|| format!("{} has no 'score' column", path.display()))?;
    let mut scores = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let cell = record.get(idx).unwrap_or("");
        scores.push(parse_cell(cell, row, "score")?);
    }
    Ok(scores)
}
