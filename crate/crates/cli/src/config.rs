use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::CliError;

/// Optional TOML file with the same keys as the command line flags.
/// Flags always win over file values.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigFile {
    pub measure: Option<String>,
    pub measures: Option<String>,
    pub n: Option<u64>,
    pub out: Option<String>,
    pub format: Option<String>,
    pub colormap: Option<String>,
    pub pos_fraction: Option<f64>,
    pub property: Option<String>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub tol: Option<f64>,
    pub max_n: Option<u64>,
    pub port: Option<u16>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::argument(format!("invalid config {}: {e}", path.display())))
    }
}
