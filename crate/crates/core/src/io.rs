//! CSV and JSON file formats.
//!
//! Numeric CSV files have no header unless the first row contains no number
//! at all, in which case it is skipped. Floats are written in Rust's shortest
//! round-trip form, so reading a written file gives back the same bits.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Result, SpredError};
use crate::geometry::{PointCloud, ProjectionMatrix};
use crate::optimizer::AnnealingTrace;
use crate::persistence::PersistenceDiagram;

/// Parses a rectangular numeric table. Rows and columns in errors are 1-based.
pub fn parse_matrix_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| SpredError::Parse { row: r + 1, col: 0, msg: e.to_string() })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if r == 0 && record.iter().all(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        let mut row = Vec::with_capacity(record.len());
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| SpredError::Parse {
                row: r + 1,
                col: c + 1,
                msg: format!("`{field}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(SpredError::Parse { row: r + 1, col: c + 1, msg: format!("`{field}` is not finite") });
            }
            row.push(v);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(SpredError::Parse {
                    row: r + 1,
                    col: row.len().min(first.len()) + 1,
                    msg: format!("expected {} columns, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(SpredError::Parse { row: 1, col: 1, msg: "no data rows".into() });
    }
    Ok(rows)
}

pub fn read_matrix_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    parse_matrix_csv(&fs::read_to_string(path)?)
}

pub fn read_points(path: &Path) -> Result<PointCloud> {
    PointCloud::from_rows(&read_matrix_csv(path)?)
}

pub fn read_projection(path: &Path) -> Result<ProjectionMatrix> {
    ProjectionMatrix::from_rows(&read_matrix_csv(path)?)
}

pub fn matrix_to_csv(rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for row in rows {
        let fields: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    create_parent(path)?;
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

pub fn write_matrix_csv(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    write_text(path, &matrix_to_csv(rows))
}

pub fn trace_to_csv(trace: &AnnealingTrace) -> String {
    let mut out = String::from("step,temperature,cost,accepted,best_cost\n");
    for (i, s) in trace.steps.iter().enumerate() {
        out.push_str(&format!("{},{:?},{:?},{},{:?}\n", i + 1, s.temperature, s.cost, s.accepted, s.best_cost));
    }
    out
}

pub fn read_diagram(path: &Path) -> Result<PersistenceDiagram> {
    PersistenceDiagram::from_json(&fs::read_to_string(path)?)
}

pub fn write_diagram(path: &Path, d: &PersistenceDiagram) -> Result<()> {
    write_text(path, &(d.to_json() + "\n"))
}

/// Pretty JSON with a trailing newline.
pub fn write_json(path: &Path, v: &serde_json::Value) -> Result<()> {
    write_text(path, &(serde_json::to_string_pretty(v)? + "\n"))
}
