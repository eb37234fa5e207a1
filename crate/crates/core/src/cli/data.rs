use std::fmt::Write as _;
use std::path::Path;

use crate::error::Error;
use crate::kernels::{IndexPoint, IndexedDataset};
use crate::linalg::Vector;

use super::CliError;

/// Parse a dataset with header `i_1,...,i_d[,v_1,...,v_q]`.
///
/// `d` is inferred from the header when `None`. Rows and columns in error
/// messages are 1-based and count the header as row 1.
pub fn load_csv(path: &Path, d: Option<usize>, q: usize) -> Result<IndexedDataset, CliError> {
    let bytes =
        std::fs::read(path).map_err(|e| CliError::Input(format!("cannot read data {}: {e}", path.display())))?;
    parse_csv(&bytes, d, q).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn parse_csv(bytes: &[u8], d: Option<usize>, q: usize) -> Result<IndexedDataset, Error> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);
    let mut records = reader.records();
    let data_err = |row: usize, column: usize, message: String| Error::Data { row, column, message };
    let header = match records.next() {
        Some(r) => r.map_err(|e| data_err(1, 1, e.to_string()))?,
        None => return Err(data_err(1, 1, "empty file, expected a header".into())),
    };
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    let d = match d {
        Some(d) => d,
        None => names.iter().take_while(|n| n.starts_with("i_")).count(),
    };
    if d == 0 {
        return Err(data_err(1, 1, "header must start with i_1".into()));
    }
    let has_values = match names.len() {
        n if n == d => false,
        n if n == d + q => true,
        n => {
            return Err(data_err(
                1,
                n.min(d + q) + 1,
                format!("expected {d} index columns optionally followed by {q} value columns, found {n} columns"),
            ))
        }
    };
    for (c, name) in names.iter().enumerate() {
        let expected = if c < d {
            format!("i_{}", c + 1)
        } else {
            format!("v_{}", c - d + 1)
        };
        if *name != expected {
            return Err(data_err(
                1,
                c + 1,
                format!("expected header `{expected}`, found `{name}`"),
            ));
        }
    }
    let width = names.len();
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (k, record) in records.enumerate() {
        let row = k + 2;
        let record = record.map_err(|e| data_err(row, 1, e.to_string()))?;
        if record.len() == 1 && record.get(0).is_some_and(|s| s.trim().is_empty()) {
            continue;
        }
        if record.len() != width {
            return Err(data_err(
                row,
                record.len().min(width) + 1,
                format!("expected {width} fields, found {}", record.len()),
            ));
        }
        let mut cells = Vec::with_capacity(width);
        for (c, cell) in record.iter().enumerate() {
            let x: f64 = cell
                .trim()
                .parse()
                .map_err(|_| data_err(row, c + 1, format!("`{cell}` is not a number")))?;
            if !x.is_finite() {
                return Err(data_err(row, c + 1, format!("`{cell}` is not finite")));
            }
            cells.push(x);
        }
        points.push(IndexPoint::new(cells[..d].to_vec()));
        if has_values {
            values.push(Vector::from_column_slice(&cells[d..]));
        }
    }
    IndexedDataset::new(points, has_values.then_some(values))
}

/// Float formatting with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV text with the given header and numeric rows.
pub fn render_csv(header: &[String], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        for (c, x) in row.iter().enumerate() {
            if c > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", fmt_f64(*x));
        }
        out.push('\n');
    }
    out
}

pub fn columns(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{prefix}_{k}")).collect()
}
