use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use cfrewrite::SamplerConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BackendDescriptor {
    Ngram { model: PathBuf },
    Remote { server_url: String },
}

/// Everything needed to replay a `rewrite` run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub config: SamplerConfig,
    pub backend: BackendDescriptor,
    pub input: PathBuf,
    pub output: PathBuf,
    pub trace: Option<PathBuf>,
    pub jobs: usize,
    /// Unix seconds.
    pub started_at: u64,
    pub finished_at: u64,
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// `<output>.manifest.json`, next to the output file.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text + "\n").map_err(|e| CliError::io("cannot write manifest", path, e))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io("cannot read manifest", path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("invalid manifest {}: {e}", path.display())))
    }
}
