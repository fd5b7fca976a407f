//! CSV output for sweep results.
//!
//! Numbers are written with Rust's shortest round-trip float formatting, which
//! is locale-independent and parses back to the identical `f64`. Infinite
//! bounds are written as `inf`.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::SweepResult;
use crate::error::{Error, Result};

fn io_error(path: &Path, e: io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

pub fn write_csv_to<W: Write>(result: &SweepResult, mut out: W) -> io::Result<()> {
    writeln!(out, "{}", result.header().join(","))?;
    for row in &result.rows {
        let mut fields: Vec<String> = row.params.iter().map(|p| p.to_string()).collect();
        fields.extend(
            [row.value, row.std_err, row.bound_lower, row.bound_upper]
                .iter()
                .map(|v| v.to_string()),
        );
        writeln!(out, "{}", fields.join(","))?;
    }
    out.flush()
}

pub fn write_csv(result: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    write_csv_to(result, BufWriter::new(file)).map_err(|e| io_error(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Reads a file written by [`write_csv`].
pub fn read_csv(path: impl AsRef<Path>) -> Result<CsvTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header: Vec<String> = match lines.next() {
        Some(line) => line
            .map_err(|e| io_error(path, e))?
            .split(',')
            .map(str::to_string)
            .collect(),
        None => {
            return Err(Error::InvalidArgument(format!(
                "{}: missing header",
                path.display()
            )))
        }
    };
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| io_error(path, e))?;
        let row = line
            .split(',')
            .map(|f| {
                f.parse::<f64>().map_err(|_| {
                    Error::InvalidArgument(format!(
                        "{}: line {}: bad number `{f}`",
                        path.display(),
                        i + 2
                    ))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(Error::InvalidArgument(format!(
                "{}: line {} has {} fields, header has {}",
                path.display(),
                i + 2,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok(CsvTable { header, rows })
}
