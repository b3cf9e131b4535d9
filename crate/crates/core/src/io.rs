//! Plain numeric CSV: UTF-8, comma separated, mandatory header, `.` decimals.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::data::{Column, Dataset, Frame};
use crate::error::{Error, Result};

fn csv_error(err: csv::Error) -> Error {
    let position = err.position().map(|p| p.record() as usize).unwrap_or(0);
    match err.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => Error::ParseError {
            row: position,
            col: len as usize,
            message: format!("ragged row: expected {expected_len} fields, found {len}"),
        },
        other => Error::ParseError {
            row: position,
            col: 0,
            message: format!("{other:?}"),
        },
    }
}

/// Reads a header + numeric body into an untargeted frame.
pub fn read_frame(path: impl AsRef<Path>) -> Result<Frame> {
    let path = path.as_ref();
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_error)?;
    let names: Vec<String> = reader
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_string)
        .collect();
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let row = i + 1;
        for (col, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::ParseError {
                row,
                col: col + 1,
                message: format!("`{cell}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteValue {
                    column: names[col].clone(),
                    row,
                });
            }
            values[col].push(v);
        }
    }
    Frame::new(
        names
            .into_iter()
            .zip(values)
            .map(|(name, values)| Column::raw(name, values))
            .collect(),
    )
}

/// Reads a dataset; every column is tagged `Raw`.
pub fn read_csv(path: impl AsRef<Path>, target: &str) -> Result<Dataset> {
    Dataset::from_frame(read_frame(path)?, target)
}

/// Writes named columns of equal length. Values use the shortest
/// representation that parses back to the identical `f64`.
pub fn write_table(names: &[&str], columns: &[&[f64]], path: impl AsRef<Path>) -> Result<()> {
    let n_rows = columns.first().map_or(0, |c| c.len());
    if let Some(bad) = columns.iter().find(|c| c.len() != n_rows) {
        return Err(Error::LengthMismatch(bad.len(), n_rows));
    }
    let mut out = std::io::BufWriter::new(File::create(path)?);
    writeln!(out, "{}", names.join(","))?;
    let mut line = String::new();
    for row in 0..n_rows {
        line.clear();
        for (j, column) in columns.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&column[row].to_string());
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_frame(frame: &Frame, path: impl AsRef<Path>) -> Result<()> {
    let names: Vec<&str> = frame.names().collect();
    let columns: Vec<&[f64]> = frame
        .columns()
        .iter()
        .map(|c| c.values.as_slice())
        .collect();
    write_table(&names, &columns, path)
}

pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    write_frame(ds.frame(), path)
}
