use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Record of one command invocation, written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name; rerunning them reproduces the
    /// outputs.
    pub args: Vec<String>,
    pub datasets: Vec<String>,
    pub method: Option<String>,
    pub kernel: Option<String>,
    pub config: serde_json::Value,
    pub seed: u64,
    pub outputs: Vec<String>,
    pub version: String,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Data(e.to_string()))?;
        fs::write(dir.join(MANIFEST_FILE), text + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }
}

/// One dataset of a benchmark table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableDataset {
    pub name: String,
    /// Relative to the manifest file.
    pub path: String,
    #[serde(default = "default_label_col")]
    pub label_col: String,
    #[serde(default)]
    pub header: bool,
}

fn default_label_col() -> String {
    "last".into()
}

fn default_repeats() -> usize {
    20
}

/// Benchmark table description read by `catspace benchmark --manifest`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableManifest {
    pub datasets: Vec<TableDataset>,
    pub methods: Vec<String>,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub seed: u64,
}

impl TableManifest {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}
