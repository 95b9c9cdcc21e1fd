//! The JSON config file: selector sets, optionally with policy, style,
//! store path and page.
//!
//! ```json
//! {
//!   "menus": [{ "menu": "#mw-panel", "group": ".portal", "item": ".portal li" }],
//!   "policy": { "policy_name": "click-frequency" },
//!   "style": { "style_name": ["highlight", "fold"], "top_n": "size" },
//!   "store": "history.json",
//!   "current_page": "/wiki/Main_Page"
//! }
//! ```

use std::path::{Path, PathBuf};

use menuadapt_core::style::compose;
use menuadapt_core::{PageId, PolicyConfig, SelectorSet, StyleConfig, StyleName};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub menus: Vec<SelectorSet>,
    #[serde(default)]
    pub policy: Option<PolicyConfig>,
    #[serde(default)]
    pub style: Option<StyleConfig>,
    /// Relative paths resolve against the config file's directory.
    #[serde(default)]
    pub store: Option<PathBuf>,
    #[serde(default)]
    pub current_page: Option<PageId>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<ConfigFile, CliError> {
        let config: ConfigFile =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid selector config: {e}")))?;
        if config.menus.is_empty() {
            return Err(CliError::Config("selector config lists no menus".into()));
        }
        if let Some(p) = &config.policy {
            p.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<ConfigFile, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read selector config {}: {e}", path.display())))?;
        let mut config = ConfigFile::parse(&text)?;
        if let (Some(store), Some(dir)) = (&config.store, path.parent()) {
            if store.is_relative() {
                config.store = Some(dir.join(store));
            }
        }
        Ok(config)
    }
}

/// Parses a style argument: one style name or several joined by `+`.
pub fn parse_styles(s: &str) -> Result<Vec<StyleName>, CliError> {
    let styles = s
        .split('+')
        .map(|part| part.trim().parse::<StyleName>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Config(e.to_string()))?;
    compose(&styles).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(styles)
}
