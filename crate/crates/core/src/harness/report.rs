//! CSV and JSON report files.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use super::config::Task;
use crate::error::{Error, Result};

/// Everything a task run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub task: Task,
    /// Per-trial table with a header row.
    pub csv: String,
    pub summary: Value,
    pub pass: bool,
}

impl RunOutput {
    /// Writes `<dir>/<task>.csv` and `<dir>/<task>.json`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        let csv_path = dir.join(format!("{}.csv", self.task.name()));
        let json_path = dir.join(format!("{}.json", self.task.name()));
        write_file(&csv_path, &self.csv)?;
        let mut json = serde_json::to_string_pretty(&self.summary).map_err(|e| Error::Io(e.to_string()))?;
        json.push('\n');
        write_file(&json_path, &json)?;
        Ok((csv_path, json_path))
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Serializes flat rows to CSV with a header.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        m: usize,
        value: f64,
        note: Option<String>,
    }

    #[test]
    fn csv_has_header() {
        let out = to_csv(&[
            Row { m: 0, value: 3.0, note: None },
            Row { m: 1, value: 2.5, note: Some("a,b".into()) },
        ])
        .unwrap();
        assert_eq!(out, "m,value,note\n0,3.0,\n1,2.5,\"a,b\"\n");
    }
}
