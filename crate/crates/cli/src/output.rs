//! Deterministic artifact writing: 17-significant-digit numerics, fixed
//! column order, no timestamps.

use std::path::Path;

use serde::Serialize;

use crate::run::CliError;

/// Round-trip exact float formatting.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

impl TableFormat {
    pub fn from_flag(raw: Option<&str>) -> Result<Self, CliError> {
        match raw {
            None | Some("csv") => Ok(TableFormat::Csv),
            Some("json") => Ok(TableFormat::Json),
            Some(other) => Err(CliError::Config(format!(
                "unknown format '{other}' (expected csv or json)"
            ))),
        }
    }
}

/// Write a numeric table as CSV or as an array of JSON row objects.
pub fn write_table(
    dir: &Path,
    stem: &str,
    format: TableFormat,
    header: &[&str],
    rows: &[Vec<f64>],
) -> Result<(), CliError> {
    match format {
        TableFormat::Csv => {
            let mut text = String::new();
            text.push_str(&header.join(","));
            text.push('\n');
            for row in rows {
                let cells: Vec<String> = row.iter().map(|&x| fmt17(x)).collect();
                text.push_str(&cells.join(","));
                text.push('\n');
            }
            write_file(dir, &format!("{stem}.csv"), text.as_bytes())
        }
        TableFormat::Json => {
            let objects: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    let map: serde_json::Map<String, serde_json::Value> = header
                        .iter()
                        .zip(row)
                        .map(|(k, &v)| (k.to_string(), serde_json::json!(v)))
                        .collect();
                    serde_json::Value::Object(map)
                })
                .collect();
            let text = serde_json::to_string_pretty(&objects)
                .map_err(|e| CliError::Config(format!("serialization failed: {e}")))?;
            write_file(dir, &format!("{stem}.json"), text.as_bytes())
        }
    }
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("serialization failed: {e}")))?;
    write_file(dir, name, text.as_bytes())
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, bytes)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}
