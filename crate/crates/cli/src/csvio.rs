//! Delimited-text datasets and coordinate tables.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use catspace::linalg::Matrix;
use catspace::Dataset;

use crate::error::{CliError, CliResult};

/// Which column holds the class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelColumn {
    /// Zero-based column index.
    Index(usize),
    Last,
    /// Every column is a feature.
    None,
}

impl FromStr for LabelColumn {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "last" => Ok(LabelColumn::Last),
            "none" => Ok(LabelColumn::None),
            _ => s
                .parse()
                .map(LabelColumn::Index)
                .map_err(|_| format!("label column must be an index, `last` or `none`, got `{s}`")),
        }
    }
}

impl std::fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LabelColumn::Index(i) => write!(f, "{i}"),
            LabelColumn::Last => f.write_str("last"),
            LabelColumn::None => f.write_str("none"),
        }
    }
}

/// Parsed table: features plus optional labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub x: Matrix,
    /// Zero-based class of each row, in first-appearance order.
    pub labels: Option<Vec<usize>>,
    /// Original label text of each class.
    pub class_names: Vec<String>,
    pub feature_names: Option<Vec<String>>,
}

/// A labelled dataset together with its label mapping.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledData {
    pub dataset: Dataset,
    pub class_names: Vec<String>,
    pub feature_names: Option<Vec<String>>,
}

/// Picks the most frequent of comma, semicolon and tab on the first
/// non-empty line. Ties go to the comma.
pub fn detect_delimiter(text: &str) -> u8 {
    let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    let mut best = (b',', line.matches(',').count());
    for &d in b";\t" {
        let n = line.matches(d as char).count();
        if n > best.1 {
            best = (d, n);
        }
    }
    best.0
}

pub fn read_table(path: &Path, label: LabelColumn, header: bool) -> CliResult<Table> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    parse_table(&text, label, header).map_err(|e| match e {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_table(text: &str, label: LabelColumn, header: bool) -> CliResult<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(detect_delimiter(text))
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let header_row = if header {
        let h = reader
            .headers()
            .map_err(|e| CliError::Data(e.to_string()))?;
        Some(h.iter().map(str::to_string).collect::<Vec<_>>())
    } else {
        None
    };

    let mut width = header_row.as_ref().map(Vec::len);
    let mut values = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    let mut rows = 0usize;
    let mut label_idx = None;
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Data(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(CliError::Data(format!(
                "row {line}: expected {w} columns, found {}",
                record.len()
            )));
        }
        let li = match label {
            LabelColumn::Index(i) if i >= w => {
                return Err(CliError::Usage(format!(
                    "label column {i} out of range for {w} columns"
                )))
            }
            LabelColumn::Index(i) => Some(i),
            LabelColumn::Last => Some(w - 1),
            LabelColumn::None => None,
        };
        label_idx = li;
        for (col, cell) in record.iter().enumerate() {
            if Some(col) == li {
                raw_labels.push(cell.to_string());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| {
                CliError::Data(format!(
                    "row {line}, column {}: non-numeric value `{cell}`",
                    col + 1
                ))
            })?;
            if !v.is_finite() {
                return Err(CliError::Data(format!(
                    "row {line}, column {}: non-finite value `{cell}`",
                    col + 1
                )));
            }
            values.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(CliError::Data("no data rows".into()));
    }
    let width = width.unwrap_or(0);
    let dim = width - usize::from(label_idx.is_some());
    if dim == 0 {
        return Err(CliError::Data("no feature columns".into()));
    }

    let mut class_names: Vec<String> = Vec::new();
    let labels = label_idx.map(|_| {
        raw_labels
            .iter()
            .map(|l| match class_names.iter().position(|c| c == l) {
                Some(k) => k,
                None => {
                    class_names.push(l.clone());
                    class_names.len() - 1
                }
            })
            .collect::<Vec<_>>()
    });
    let feature_names = header_row.map(|h| {
        h.into_iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != label_idx)
            .map(|(_, n)| n)
            .collect()
    });
    Ok(Table {
        x: Matrix::from_vec(rows, dim, values).map_err(CliError::from)?,
        labels,
        class_names,
        feature_names,
    })
}

/// Reads a labelled dataset. At least two classes are required.
pub fn load_csv(path: &Path, label: LabelColumn, header: bool) -> CliResult<LabeledData> {
    if label == LabelColumn::None {
        return Err(CliError::Usage("a label column is required".into()));
    }
    let t = read_table(path, label, header)?;
    into_labeled(t).map_err(|e| match e {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn into_labeled(t: Table) -> CliResult<LabeledData> {
    let labels = t
        .labels
        .ok_or_else(|| CliError::Usage("a label column is required".into()))?;
    if t.class_names.len() < 2 {
        return Err(CliError::Data(format!(
            "found {} class, at least two are required",
            t.class_names.len()
        )));
    }
    let k = t.class_names.len();
    Ok(LabeledData {
        dataset: Dataset::new(t.x, labels, k)?,
        class_names: t.class_names,
        feature_names: t.feature_names,
    })
}

/// Tab-separated coordinates with a `y1 … yK` header and an optional
/// trailing label column.
pub fn coordinates_tsv(y: &Matrix, labels: Option<(&[usize], &[String])>) -> String {
    let mut out = String::new();
    let names: Vec<String> = (1..=y.cols()).map(|k| format!("y{k}")).collect();
    out.push_str(&names.join("\t"));
    if labels.is_some() {
        out.push_str("\tlabel");
    }
    out.push('\n');
    for i in 0..y.rows() {
        let row: Vec<String> = y.row(i).iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&row.join("\t"));
        if let Some((l, n)) = labels {
            let _ = write!(out, "\t{}", n[l[i]]);
        }
        out.push('\n');
    }
    out
}
