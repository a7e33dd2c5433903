//! Delimited dataset files.

use std::path::Path;
use std::str::FromStr;

use crate::data::{Dataset, Label, LabeledInstance};
use crate::error::{Error, Result};

/// Label column by zero-based index (negative counts from the end) or header name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Index(i64),
    Name(String),
}

impl FromStr for LabelColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Config("empty label column".into()));
        }
        Ok(match s.parse::<i64>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

fn resolve(column: &LabelColumn, header: Option<&csv::StringRecord>, width: usize) -> Result<usize> {
    match column {
        LabelColumn::Index(i) => {
            let idx = if *i < 0 { width as i64 + i } else { *i };
            if idx < 0 || idx as usize >= width {
                return Err(Error::Config(format!("label column {i} out of range for {width} columns")));
            }
            Ok(idx as usize)
        }
        LabelColumn::Name(name) => header
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| Error::Config(format!("no column named '{name}'"))),
    }
}

/// Reads a delimited file into a binary dataset. Lines starting with `@` are
/// skipped. The first row is a header when the label column is given by name or when
/// one of its feature cells is not numeric. Rows whose label equals `positive_label`
/// become positives; all others negatives.
pub fn parse_dataset(path: &Path, label_column: &LabelColumn, positive_label: &str, delimiter: u8) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    parse_dataset_str(&text, label_column, positive_label, delimiter)
}

pub fn parse_dataset_str(text: &str, label_column: &LabelColumn, positive_label: &str, delimiter: u8) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(delimiter)
        .comment(Some(b'@'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for r in reader.records() {
        let r = r.map_err(|e| Error::Parse { line: e.position().map_or(0, |p| p.line() as usize), message: e.to_string() })?;
        if r.iter().all(|c| c.is_empty()) {
            continue;
        }
        records.push(r);
    }
    let Some(first) = records.first() else {
        return Err(Error::Validation("the file holds no instances".into()));
    };
    let width = first.len();
    let is_header = match label_column {
        LabelColumn::Name(_) => true,
        LabelColumn::Index(_) => {
            let label = resolve(label_column, None, width)?;
            first.iter().enumerate().any(|(i, c)| i != label && c.parse::<f64>().is_err())
        }
    };
    let header = is_header.then(|| first.clone());
    let label = resolve(label_column, header.as_ref(), width)?;
    let body = if is_header { &records[1..] } else { &records[..] };

    let mut instances = Vec::with_capacity(body.len());
    for r in body {
        let line = r.position().map_or(0, |p| p.line() as usize);
        if r.len() != width {
            return Err(Error::Parse { line, message: format!("expected {width} fields, found {}", r.len()) });
        }
        let mut features = Vec::with_capacity(width - 1);
        for (i, cell) in r.iter().enumerate() {
            if i == label {
                continue;
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| Error::Parse { line, message: format!("non-numeric feature '{cell}' in column {i}") })?;
            if !v.is_finite() {
                return Err(Error::Parse { line, message: format!("non-finite feature '{cell}' in column {i}") });
            }
            features.push(v);
        }
        let y = if &r[label] == positive_label { Label::Positive } else { Label::Negative };
        instances.push(LabeledInstance::new(features, y)?);
    }
    let ds = Dataset::new(instances)?;
    let c = ds.counts();
    if c.n_pos == 0 || c.n_neg == 0 {
        return Err(Error::Validation(format!(
            "positive label '{positive_label}' gives {} positives and {} negatives",
            c.n_pos, c.n_neg
        )));
    }
    Ok(ds)
}

/// Writes instances as `x0,...,x{d-1},label` with labels 1/0.
pub fn write_instances_csv(path: &Path, instances: &[LabeledInstance]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_io)?;
    let d = instances.first().map_or(0, |i| i.dim());
    let mut header: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
    header.push("label".into());
    w.write_record(&header).map_err(csv_io)?;
    for inst in instances {
        let mut row: Vec<String> = inst.features.iter().map(|v| v.to_string()).collect();
        row.push(inst.label.bit().to_string());
        w.write_record(&row).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_io(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse { line: 0, message: format!("{other:?}") },
    }
}
