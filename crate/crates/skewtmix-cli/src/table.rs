//! CSV ingestion: header handling, column selection by name or 1-based
//! index, and rejection of rows with missing or non-numeric values
//! (reported by 1-based data row number).

use std::path::Path;

use nalgebra::DMatrix;
use skewtmix::DataMatrix;

use crate::errors::{CliError, CliResult};

/// Ingested data plus the original 1-based row number of every kept row
/// (rows with unparseable cells are dropped, not patched).
pub struct Table {
    pub data: DataMatrix,
    pub row_ids: Vec<usize>,
}

/// Read `path`, keep the selected columns, and drop rows containing
/// missing or non-numeric cells, listing them on standard error.
///
/// `columns`: comma-separated names (requires a header) or 1-based
/// indices; `None` keeps every column.
pub fn read_table(path: &Path, has_header: bool, columns: Option<&str>) -> CliResult<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;

    let header: Vec<String> = if has_header {
        reader
            .headers()
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
            .iter()
            .map(|s| s.trim().to_string())
            .collect()
    } else {
        Vec::new()
    };

    let mut raw_rows: Vec<Vec<String>> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| {
            CliError::Input(format!("{} row {}: {e}", path.display(), i + 1))
        })?;
        raw_rows.push(rec.iter().map(|s| s.trim().to_string()).collect());
    }
    if raw_rows.is_empty() {
        return Err(CliError::Input(format!("{}: no data rows", path.display())));
    }
    let width = if has_header { header.len() } else { raw_rows[0].len() };
    let header = if has_header {
        header
    } else {
        (1..=width).map(|i| format!("V{i}")).collect()
    };

    let picked: Vec<usize> = match columns {
        None => (0..width).collect(),
        Some(spec) => {
            let mut idx = Vec::new();
            for item in spec.split(',') {
                let item = item.trim();
                if item.is_empty() {
                    continue;
                }
                if let Ok(one_based) = item.parse::<usize>() {
                    if one_based == 0 || one_based > width {
                        return Err(CliError::Input(format!(
                            "column index {one_based} out of range 1..={width}"
                        )));
                    }
                    idx.push(one_based - 1);
                } else {
                    let pos = header.iter().position(|h| h == item).ok_or_else(|| {
                        CliError::Input(format!(
                            "no column named {item:?} (have: {})",
                            header.join(", ")
                        ))
                    })?;
                    idx.push(pos);
                }
            }
            if idx.is_empty() {
                return Err(CliError::Input("empty column selection".into()));
            }
            idx
        }
    };

    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(raw_rows.len());
    let mut row_ids: Vec<usize> = Vec::with_capacity(raw_rows.len());
    let mut dropped: Vec<usize> = Vec::new();
    for (i, row) in raw_rows.iter().enumerate() {
        let mut vals = Vec::with_capacity(picked.len());
        let mut ok = row.len() >= width;
        if ok {
            for &c in &picked {
                match row[c].parse::<f64>() {
                    Ok(v) if v.is_finite() => vals.push(v),
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
        }
        if ok {
            kept.push(vals);
            row_ids.push(i + 1);
        } else {
            dropped.push(i + 1);
        }
    }
    if !dropped.is_empty() {
        let shown: Vec<String> = dropped.iter().take(20).map(|r| r.to_string()).collect();
        let suffix = if dropped.len() > 20 { ", …" } else { "" };
        eprintln!(
            "warning: dropped {} row(s) with missing or non-numeric values: {}{}",
            dropped.len(),
            shown.join(", "),
            suffix
        );
    }
    if kept.is_empty() {
        return Err(CliError::Input(format!(
            "{}: no usable rows after dropping incomplete ones",
            path.display()
        )));
    }

    let n = kept.len();
    let p = picked.len();
    let rows = DMatrix::from_fn(n, p, |i, j| kept[i][j]);
    let names: Vec<String> = picked.iter().map(|&c| header[c].clone()).collect();
    let data = DataMatrix::new(rows, names).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(Table { data, row_ids })
}
