//! Matrix and family ingestion: CSV (one row per line) and JSON
//! `{n, rows}` / `{times, entries: [{s, t, matrix}]}`.

use std::path::Path;

use serde::Deserialize;

use super::{TransitionFamily, ValidationTolerance};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn json_err(e: serde_json::Error) -> Error {
    parse_err(e.line(), e.column(), e.to_string())
}

fn square(rows: Vec<Vec<f64>>, line_of: impl Fn(usize) -> usize) -> Result<DenseMatrix> {
    let n = rows.len();
    if n == 0 {
        return Err(parse_err(1, 1, "no matrix rows"));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(parse_err(
                line_of(i),
                r.len().min(n) + 1,
                format!("row {} has {} entries, expected {n}", i + 1, r.len()),
            ));
        }
        if let Some(j) = r.iter().position(|x| !x.is_finite()) {
            return Err(parse_err(line_of(i), j + 1, "entry is not finite"));
        }
    }
    DenseMatrix::from_rows(&rows)
}

/// Comma-separated rows; blank lines and `#` comments are skipped.
pub fn parse_matrix_csv(text: &str) -> Result<DenseMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, 1, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(j, field)| {
                field
                    .parse::<f64>()
                    .map_err(|e| parse_err(line, j + 1, format!("{field:?} is not a number: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
        lines.push(line);
    }
    square(rows, |i| lines[i])
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixJson {
    n: Option<usize>,
    rows: Vec<Vec<f64>>,
}

pub fn parse_matrix_json(text: &str) -> Result<DenseMatrix> {
    let m: MatrixJson = serde_json::from_str(text).map_err(json_err)?;
    if let Some(n) = m.n.filter(|&n| n != m.rows.len()) {
        return Err(parse_err(1, 1, format!("n = {n} but {} rows given", m.rows.len())));
    }
    square(m.rows, |_| 1)
}

/// JSON when the first non-blank character is `{`, CSV otherwise.
pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    if text.trim_start().starts_with('{') {
        parse_matrix_json(text)
    } else {
        parse_matrix_csv(text)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyEntryJson {
    s: f64,
    t: f64,
    matrix: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyJson {
    times: Vec<f64>,
    entries: Vec<FamilyEntryJson>,
}

pub fn parse_family_json(text: &str, tol: ValidationTolerance) -> Result<TransitionFamily> {
    let f: FamilyJson = serde_json::from_str(text).map_err(json_err)?;
    let entries = f
        .entries
        .into_iter()
        .map(|e| Ok((e.s, e.t, square(e.matrix, |_| 1)?)))
        .collect::<Result<Vec<_>>>()?;
    TransitionFamily::new(f.times, entries, tol)
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    parse_matrix(&read_to_string(path)?)
}

pub fn read_family(path: &Path, tol: ValidationTolerance) -> Result<TransitionFamily> {
    parse_family_json(&read_to_string(path)?, tol)
}
