use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use qsk_core::Result;
use serde::{Deserialize, Serialize};

use crate::args::Command;

/// Record of one run; `config` alone determines the result bytes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: Command,
    pub output: Option<PathBuf>,
    pub threads: usize,
    pub wall_time_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<serde_json::Value>,
}

impl Manifest {
    pub fn new(
        config: Command,
        output: Option<PathBuf>,
        wall: Duration,
        summary: Option<serde_json::Value>,
    ) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            output,
            threads: rayon::current_num_threads(),
            wall_time_seconds: wall.as_secs_f64(),
            summary,
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| crate::with_path(e, path))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").map_err(|e| crate::with_path(e, path))
    }
}
