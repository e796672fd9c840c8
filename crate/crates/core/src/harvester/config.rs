use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarvestError;

pub const DEFAULT_MAX_PAGES: u32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProviderKind {
    LocalCorpus,
    RemoteApi,
}

/// One `[name]` section of a providers file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    #[serde(skip_deserializing)]
    pub name: String,
    pub kind: ProviderKind,
    /// Corpus directory or search endpoint URL.
    pub base: String,
    /// Name of the environment variable holding the bearer token.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auth_env: Option<String>,
    pub rate_per_min: u32,
    pub page_size: u32,
    #[serde(default = "default_max_pages")]
    pub max_pages: u32,
}

fn default_max_pages() -> u32 {
    DEFAULT_MAX_PAGES
}

impl ProviderConfig {
    pub fn local(name: impl Into<String>, dir: impl AsRef<Path>) -> Self {
        ProviderConfig {
            name: name.into(),
            kind: ProviderKind::LocalCorpus,
            base: dir.as_ref().display().to_string(),
            auth_env: None,
            rate_per_min: 600,
            page_size: 50,
            max_pages: DEFAULT_MAX_PAGES,
        }
    }

    pub fn validate(&self) -> Result<(), HarvestError> {
        let invalid = |m: String| HarvestError::InvalidConfig(format!("provider `{}`: {m}", self.name));
        if self.rate_per_min == 0 {
            return Err(invalid("rate_per_min must be positive".into()));
        }
        if self.page_size == 0 || self.max_pages == 0 {
            return Err(invalid("page_size and max_pages must be positive".into()));
        }
        if self.kind == ProviderKind::LocalCorpus && !Path::new(&self.base).is_dir() {
            return Err(invalid(format!("`{}` is not a readable directory", self.base)));
        }
        Ok(())
    }

    /// Resolves a relative corpus directory against `dir`.
    pub fn relative_to(mut self, dir: &Path) -> Self {
        if self.kind == ProviderKind::LocalCorpus && Path::new(&self.base).is_relative() {
            self.base = dir.join(&self.base).display().to_string();
        }
        self
    }
}

/// Parses a providers file: one TOML table per provider, keyed by name.
pub fn parse_providers(text: &str) -> Result<Vec<ProviderConfig>, HarvestError> {
    let tables: BTreeMap<String, ProviderConfig> =
        toml::from_str(text).map_err(|e| HarvestError::InvalidConfig(e.to_string()))?;
    Ok(tables
        .into_iter()
        .map(|(name, cfg)| ProviderConfig { name, ..cfg })
        .collect())
}

/// Loads a providers file; relative corpus directories are taken relative
/// to the file.
pub fn load_providers(path: impl AsRef<Path>) -> Result<Vec<ProviderConfig>, HarvestError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarvestError::InvalidConfig(format!("{}: {e}", path.display())))?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_else(PathBuf::new);
    Ok(parse_providers(&text)?
        .into_iter()
        .map(|p| p.relative_to(&dir))
        .collect())
}
