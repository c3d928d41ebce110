use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};

use iob_energy::config::{self, parse_config};
use iob_energy::model::NodeConfig;

/// Directory searched for `<name>.json` when a preset name is not built in.
pub const PRESET_DIR_ENV: &str = "IOB_ENERGY_PRESET_DIR";

#[derive(Debug, Clone, PartialEq)]
pub enum NodeSource {
    File(PathBuf),
    Named(String),
}

impl NodeSource {
    /// Built-in preset names win, then existing files, then the preset directory.
    pub fn parse(text: &str) -> Self {
        if config::preset_file(text).is_some() {
            NodeSource::Named(text.to_string())
        } else if Path::new(text).is_file() {
            NodeSource::File(PathBuf::from(text))
        } else {
            NodeSource::Named(text.to_string())
        }
    }
}

fn load_file(path: &Path) -> Result<NodeConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_config(&text).with_context(|| format!("invalid config {}", path.display()))
}

/// Returns a display label and the validated configuration.
pub fn resolve(source: &NodeSource) -> Result<(String, NodeConfig)> {
    match source {
        NodeSource::File(path) => {
            let label = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "config".into());
            Ok((label, load_file(path)?))
        }
        NodeSource::Named(name) => {
            if config::preset_file(name).is_some() {
                return Ok((name.clone(), config::preset(name)?));
            }
            match std::env::var_os(PRESET_DIR_ENV) {
                Some(dir) => {
                    let path = Path::new(&dir).join(format!("{name}.json"));
                    if path.is_file() {
                        Ok((name.clone(), load_file(&path)?))
                    } else {
                        Err(anyhow!("unknown preset `{name}` (not built in, no {})", path.display()))
                    }
                }
                None => Err(anyhow!(
                    "unknown preset `{name}`; built-in presets are {}",
                    config::PRESET_NAMES.join(", ")
                )),
            }
        }
    }
}
