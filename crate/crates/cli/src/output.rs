use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;

/// Version of the CSV layouts. Bump when a column is added, removed or renamed.
pub const CSV_SCHEMA: &str = "dicke-vqe/csv/1";

/// Writes through a sibling temporary file and renames it into place, so a
/// reader never sees a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    atomic_with(path, |tmp| {
        let mut f = std::fs::File::create(tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        Ok(())
    })
}

/// Lets `fill` write a temporary sibling of `path`, then renames it into place.
pub fn atomic_with(path: &Path, fill: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = path.file_name().with_context(|| format!("{} has no file name", path.display()))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    if let Err(e) = fill(&tmp) {
        let _ = std::fs::remove_file(&tmp);
        return Err(e.context(format!("writing {}", path.display())));
    }
    std::fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Builds a CSV in memory and writes it atomically.
pub fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))?;
    write_atomic(path, &bytes)
}

pub fn unix_seconds() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

/// Provenance record written next to every command's outputs.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// The fully resolved configuration the command ran with.
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub artifact_version: String,
    pub csv_schema: String,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn start(command: &str, config: serde_json::Value, seeds: Vec<u64>) -> Self {
        RunManifest {
            command: command.into(),
            config,
            seeds,
            artifact_version: env!("CARGO_PKG_VERSION").into(),
            csv_schema: CSV_SCHEMA.into(),
            started_unix: unix_seconds(),
            finished_unix: 0.0,
            outputs: Vec::new(),
        }
    }

    pub fn finish(mut self, path: &Path, outputs: Vec<PathBuf>) -> Result<()> {
        self.finished_unix = unix_seconds();
        self.outputs = outputs;
        write_json(path, &self)
    }
}
