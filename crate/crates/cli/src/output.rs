//! Versioned JSON and CSV writers.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Envelope shared by every JSON output.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    generated_at: String,
    command: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::Io(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, command: &str, body: &T) -> Result<PathBuf, CliError> {
        let envelope = Envelope {
            schema_version: SCHEMA_VERSION,
            generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            command,
            body,
        };
        let text = serde_json::to_string_pretty(&envelope).map_err(|e| CliError::Io(e.to_string()))?;
        let path = self.path(name);
        fs::write(&path, text + "\n").map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }

    /// Each row type carries its own `schema_version` column.
    pub fn write_csv<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let io = |e: csv::Error| CliError::Io(format!("cannot write {}: {e}", path.display()));
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        for row in rows {
            w.serialize(row).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Io(e.to_string()))?;
        Ok(path)
    }
}
