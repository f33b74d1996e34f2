//! File writers. Floats go out with 17 significant digits so every value
//! round-trips exactly and identical runs produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, CliResult};

pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Header row, then one row per abscissa; `columns[k][i]` is row `i` of column `k`.
pub fn csv_table(headers: &[&str], columns: &[&[f64]]) -> CliResult<String> {
    if headers.len() != columns.len() {
        return Err(CliError::user("CSV header and column counts differ"));
    }
    let rows = columns.first().map_or(0, |c| c.len());
    if columns.iter().any(|c| c.len() != rows) {
        return Err(CliError::user("CSV columns have different lengths"));
    }
    let mut out = headers.join(",");
    out.push('\n');
    for i in 0..rows {
        for (k, col) in columns.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", float(col[i]));
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("cannot create output directory {}", dir.display()), e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(format!("cannot write {}", path.display()), e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::user(format!("serialization: {e}")))?;
    text.push('\n');
    write_text(path, &text)
}

/// `tp1`, `fdem:sigma1` → `tp1`, `fdem-sigma1`.
pub fn slug(name: &str) -> String {
    name.replace(':', "-")
}

/// Noise level as it appears in file names: `0`, `1e-4`, `2.5e-3`.
pub fn delta_tag(delta: f64) -> String {
    if delta == 0.0 {
        "0".into()
    } else {
        format!("{delta:e}")
    }
}
