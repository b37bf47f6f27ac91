//! JSON config file. Keys mirror the long flag names; flags win.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn into_vec(self) -> Vec<f64> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }

    pub fn single(self, key: &str) -> Result<f64, CliError> {
        match self {
            OneOrMany::One(x) => Ok(x),
            OneOrMany::Many(v) if v.len() == 1 => Ok(v[0]),
            OneOrMany::Many(_) => Err(CliError::Usage(format!(
                "config key `{key}` takes a single number here"
            ))),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub scenario: Option<String>,
    pub r: Option<OneOrMany>,
    pub nbar: Option<OneOrMany>,
    pub gamma: Option<f64>,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub nbar1: Option<f64>,
    pub nbar2: Option<f64>,
    pub variant: Option<String>,
    pub steps: Option<usize>,
    pub tau: Option<OneOrMany>,
    pub dim: Option<usize>,
    pub total_t: Option<f64>,
    pub output: Option<PathBuf>,
    pub format: Option<String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }
}
