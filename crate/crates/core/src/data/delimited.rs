use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use super::RawTable;
use crate::numkernel::Matrix;
use crate::{Error, Result};

/// Where the class label of each row comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum LabelSource {
    /// Column with this header name (requires a header row).
    Column(String),
    /// Zero-based column index.
    Index(usize),
    /// Separate file, one row per line; the first whitespace-separated token is the label.
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub label: LabelSource,
    pub delimiter: u8,
    pub has_header: bool,
    /// Cells equal to this token (after trimming) are recorded as missing.
    /// Empty cells are always missing.
    pub missing_token: String,
    /// Maps raw label strings to integers. When empty, labels must parse as integers.
    pub label_map: BTreeMap<String, i64>,
    /// Columns (by header name) ignored entirely, e.g. row identifiers.
    pub drop_columns: Vec<String>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            label: LabelSource::Index(0),
            delimiter: b',',
            has_header: true,
            missing_token: "NA".into(),
            label_map: BTreeMap::new(),
            drop_columns: Vec::new(),
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<RawTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let external = match &opts.label {
        LabelSource::File(p) => Some(read_label_file(p, opts)?),
        _ => None,
    };
    parse_inner(file, path, opts, external)
}

/// Parses delimited text from any reader. `source` only labels error messages.
/// A [`LabelSource::File`] is read from disk.
pub fn parse_csv<R: Read>(reader: R, source: &Path, opts: &CsvOptions) -> Result<RawTable> {
    let external = match &opts.label {
        LabelSource::File(p) => Some(read_label_file(p, opts)?),
        _ => None,
    };
    parse_inner(reader, source, opts, external)
}

fn parse_label(raw: &str, opts: &CsvOptions) -> std::result::Result<i64, String> {
    let raw = raw.trim();
    if !opts.label_map.is_empty() {
        return opts
            .label_map
            .get(raw)
            .copied()
            .ok_or_else(|| format!("label {raw:?} not in label map"));
    }
    if let Ok(v) = raw.parse::<i64>() {
        return Ok(v);
    }
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() && v.fract() == 0.0 && v.abs() < 9.0e15 => Ok(v as i64),
        _ => Err(format!("unparseable label {raw:?}")),
    }
}

fn read_label_file(path: &Path, opts: &CsvOptions) -> Result<Vec<i64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let Some(token) = line.split_whitespace().next() else {
            continue;
        };
        let label = parse_label(token, opts).map_err(|message| Error::Parse {
            path: path.to_path_buf(),
            line: k as u64 + 1,
            message,
        })?;
        labels.push(label);
    }
    Ok(labels)
}

fn parse_inner<R: Read>(
    reader: R,
    source: &Path,
    opts: &CsvOptions,
    external_labels: Option<Vec<i64>>,
) -> Result<RawTable> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: source.to_path_buf(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(opts.has_header)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(reader);

    let header: Option<Vec<String>> = if opts.has_header {
        let h = rdr
            .headers()
            .map_err(|e| parse_err(1, e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        Some(h)
    } else {
        None
    };

    let column_by_name = |name: &str| -> Result<usize> {
        let h = header.as_ref().ok_or_else(|| {
            Error::Config(format!(
                "column {name:?} referenced by name but the file has no header"
            ))
        })?;
        h.iter().position(|c| c == name).ok_or_else(|| {
            Error::Config(format!("no column named {name:?} in {}", source.display()))
        })
    };

    let label_col = match &opts.label {
        LabelSource::Column(name) => Some(column_by_name(name)?),
        LabelSource::Index(i) => Some(*i),
        LabelSource::File(_) => None,
    };
    let mut dropped = Vec::with_capacity(opts.drop_columns.len());
    for name in &opts.drop_columns {
        dropped.push(column_by_name(name)?);
    }

    let mut width = header.as_ref().map(Vec::len);
    let mut values = Vec::new();
    let mut present = Vec::new();
    let mut labels = Vec::new();
    let mut feature_cols: Vec<usize> = Vec::new();

    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if width.is_none() {
            width = Some(record.len());
        }
        let w = width.unwrap_or(record.len());
        if record.len() != w {
            return Err(parse_err(
                line,
                format!("ragged row: {} fields, expected {w}", record.len()),
            ));
        }
        if feature_cols.is_empty() {
            if let Some(lc) = label_col {
                if lc >= w {
                    return Err(Error::Config(format!(
                        "label column {lc} out of range for {w} columns"
                    )));
                }
            }
            feature_cols = (0..w)
                .filter(|c| Some(*c) != label_col && !dropped.contains(c))
                .collect();
            if feature_cols.is_empty() {
                return Err(parse_err(line, "no feature columns".into()));
            }
        }
        if let Some(lc) = label_col {
            labels.push(parse_label(&record[lc], opts).map_err(|m| parse_err(line, m))?);
        }
        for &c in &feature_cols {
            let cell = &record[c];
            if cell.is_empty() || cell == opts.missing_token {
                values.push(0.0);
                present.push(false);
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => {
                    values.push(v);
                    present.push(true);
                }
                _ => {
                    return Err(parse_err(
                        line,
                        format!("non-numeric feature cell {cell:?} in column {c}"),
                    ))
                }
            }
        }
    }

    let rows = present.len() / feature_cols.len().max(1);
    if rows == 0 {
        return Err(Error::Data(format!(
            "{} contains no data rows",
            source.display()
        )));
    }
    if let Some(ext) = external_labels {
        if ext.len() != rows {
            return Err(Error::Data(format!(
                "label file has {} entries for {rows} rows",
                ext.len()
            )));
        }
        labels = ext;
    }
    let names = header.map(|h| feature_cols.iter().map(|&c| h[c].clone()).collect());
    let features = Matrix::new(rows, feature_cols.len(), values)?;
    RawTable::with_mask(features, present, labels, names)
}
