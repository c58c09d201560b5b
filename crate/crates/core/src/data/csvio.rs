use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::Dataset;

pub const LABEL_COLUMN: &str = "Class";

/// Loads a comma-separated file with a header row and a `Class` column.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path)
        .map_err(|e| Error::data(format!("cannot open {}: {e}", path.display())))?;
    let ds = read_csv(file)?;
    log::info!(
        "loaded {}: {} rows, {} features, {} positive",
        path.display(),
        ds.len(),
        ds.n_features(),
        ds.count(1)
    );
    Ok(ds)
}

/// Parses CSV from any reader. Row numbers in errors count data rows from 1.
pub fn read_csv(reader: impl Read) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let label_idx = headers
        .iter()
        .position(|h| h == LABEL_COLUMN)
        .ok_or_else(|| Error::data(format!("no `{LABEL_COLUMN}` column in header")))?;
    let columns: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let row = r + 1;
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::Parse {
                row,
                column: String::new(),
                detail: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        for (i, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if i == label_idx {
                labels.push(parse_label(cell).ok_or_else(|| Error::Parse {
                    row,
                    column: headers[i].clone(),
                    detail: format!("unknown label value {cell:?}"),
                })?);
            } else {
                let v: f64 = cell.parse().map_err(|_| Error::Parse {
                    row,
                    column: headers[i].clone(),
                    detail: format!("not a number: {cell:?}"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        row,
                        column: headers[i].clone(),
                        detail: format!("non-finite value {cell:?}"),
                    });
                }
                data.push(v);
            }
        }
    }
    if labels.is_empty() {
        return Err(Error::data("csv has no data rows"));
    }
    let features = Matrix::new(labels.len(), columns.len(), data)?;
    Dataset::new(features, labels, columns)
}

fn parse_label(cell: &str) -> Option<u8> {
    match cell {
        "0" => Some(0),
        "1" => Some(1),
        other => match other.parse::<f64>() {
            Ok(v) if v == 0.0 => Some(0),
            Ok(v) if v == 1.0 => Some(1),
            _ => None,
        },
    }
}

/// Writes features and the `Class` column. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_csv(dataset: &Dataset, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = dataset.columns.iter().map(String::as_str).collect();
    header.push(LABEL_COLUMN);
    w.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for (row, &label) in dataset.features.iter_rows().zip(&dataset.labels) {
        record.clear();
        record.extend(row.iter().map(|v| format!("{v}")));
        record.push(label.to_string());
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}
