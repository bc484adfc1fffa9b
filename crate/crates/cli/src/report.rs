//! File emission. JSON reports share one envelope; CSV files are plain
//! comma-separated tables with `.` decimals and shortest round-trip floats.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

pub const REPORT_SCHEMA: &str = "excite-prep/report/v1";

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: &'static str,
    kind: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_unix: Option<u64>,
    data: &'a T,
}

pub struct Emitter {
    dir: PathBuf,
    timestamp: Option<u64>,
    written: Vec<PathBuf>,
}

impl Emitter {
    pub fn new(dir: &Path, timestamp: bool) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let timestamp = timestamp.then(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        Ok(Self { dir: dir.to_path_buf(), timestamp, written: Vec::new() })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn write(&mut self, name: &str, body: String) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, kind: &str, data: &T) -> Result<(), CliError> {
        let envelope = Envelope { schema: REPORT_SCHEMA, kind, generated_unix: self.timestamp, data };
        let mut body = serde_json::to_string_pretty(&envelope).map_err(|e| CliError::Runtime(e.to_string()))?;
        body.push('\n');
        self.write(name, body)
    }

    /// With a timestamp the first line is `# generated_unix=<secs>`.
    pub fn csv(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        let mut body = String::new();
        if let Some(ts) = self.timestamp {
            let _ = writeln!(body, "# generated_unix={ts}");
        }
        body.push_str(&table.header.join(","));
        body.push('\n');
        for row in &table.rows {
            body.push_str(&row.join(","));
            body.push('\n');
        }
        self.write(name, body)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Shortest round-trip form; exponent notation outside `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
