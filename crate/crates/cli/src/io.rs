use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, Result};

/// Reads a JSON document. Returns it both parsed and as a raw value so the
/// manifest can echo exactly what was run.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<(T, serde_json::Value)> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let raw: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
        CliError::Config(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column()))
    })?;
    let parsed = serde_json::from_value(raw.clone())
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok((parsed, raw))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Failed(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Replaces a top-level scalar field of the config echo.
pub fn override_field(raw: &mut serde_json::Value, key: &str, value: serde_json::Value) {
    if let Some(obj) = raw.as_object_mut() {
        obj.insert(key.to_string(), value);
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<String>,
}

/// Output directory that remembers what was written. The manifest goes last.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
    started: Instant,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            written: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn path(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.root.join(name)
    }

    pub fn finish(self, command: &str, config: serde_json::Value, seed: Option<u64>) -> Result<()> {
        let manifest = RunManifest {
            command: command.to_string(),
            config,
            seed,
            version: version(),
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            outputs: self.written,
        };
        write_json(&self.root.join("manifest.json"), &manifest)
    }
}

pub fn version() -> String {
    match option_env!("ALASSO_GIT_DESCRIBE") {
        Some(rev) => format!("v{}-{rev}", env!("CARGO_PKG_VERSION")),
        None => format!("v{}", env!("CARGO_PKG_VERSION")),
    }
}
