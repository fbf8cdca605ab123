use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use super::{remap_label, Dataset};
use crate::error::{Error, Result};

/// Loads a numeric CSV whose last `num_labels` columns are labels.
///
/// A first line containing any non-numeric field is taken as the header.
pub fn load_csv(path: impl AsRef<Path>, num_labels: usize) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, num_labels, path)
}

pub fn parse_csv(text: &str, num_labels: usize, origin: &Path) -> Result<Dataset> {
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut header: Option<Vec<String>> = None;
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let lineno = idx + 1;
        let record = record.map_err(|e| Error::parse(origin, lineno, e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(values) => rows.push((lineno, values)),
            Err(_) if header.is_none() && rows.is_empty() => {
                header = Some(record.iter().map(str::to_string).collect());
            }
            Err(_) => {
                return Err(Error::parse(origin, lineno, "non-numeric field in data row"));
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::parse(origin, 1, "no data rows"));
    }
    let width = header.as_ref().map_or(rows[0].1.len(), Vec::len);
    if num_labels == 0 || num_labels >= width {
        return Err(Error::Config(format!(
            "{num_labels} label columns requested but rows have {width} columns"
        )));
    }
    if let Some((lineno, row)) = rows.iter().find(|(_, r)| r.len() != width) {
        return Err(Error::parse(
            origin,
            *lineno,
            format!("expected {width} columns, found {}", row.len()),
        ));
    }

    let d = width - num_labels;
    let n = rows.len();
    let mut features = Array2::zeros((n, d));
    let mut labels = Array2::zeros((n, num_labels));
    for (i, (lineno, row)) in rows.iter().enumerate() {
        for j in 0..d {
            features[[i, j]] = row[j];
        }
        for k in 0..num_labels {
            labels[[i, k]] = remap_label(row[d + k]).ok_or_else(|| {
                Error::Validation(format!(
                    "line {lineno}: label value {} not in {{0, 1, -1}}",
                    row[d + k]
                ))
            })?;
        }
    }
    match header {
        Some(names) => Dataset::with_names(
            features,
            labels,
            names[..d].to_vec(),
            names[d..].to_vec(),
        ),
        None => Dataset::new(features, labels),
    }
}

/// Writes features then labels (as -1/+1) with a header row.
pub fn write_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    let header: Vec<&str> = data
        .feature_names()
        .iter()
        .chain(data.label_names())
        .map(String::as_str)
        .collect();
    writeln!(out, "{}", header.join(",")).expect("write to Vec");
    for (x, y) in data.features().rows().into_iter().zip(data.labels().rows()) {
        let fields: Vec<String> = x
            .iter()
            .map(|v| v.to_string())
            .chain(y.iter().map(|v| v.to_string()))
            .collect();
        writeln!(out, "{}", fields.join(",")).expect("write to Vec");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
