use std::path::Path;

use serde::{Deserialize, Serialize};

use super::field::{make_patchy, make_transect, GradientSpec, PatchSpec, PathSpec, TerrainField};
use super::{EnvironmentConfig, TerrainError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSpec {
    Transect(GradientSpec),
    Patchy(PatchSpec),
}

/// The terrain half of a site config file. Other sections of the same file
/// (intruder, protocol, gaits) are ignored here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerrainConfig {
    pub name: String,
    #[serde(default)]
    pub environment: EnvironmentConfig,
    pub field: FieldSpec,
    /// Path along which a campaign samples. Defaults to the whole transect;
    /// required for grid fields.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathSpec>,
}

impl TerrainConfig {
    pub fn from_toml(text: &str) -> Result<Self, TerrainError> {
        let cfg: TerrainConfig = toml::from_str(text).map_err(|e| TerrainError::Config(e.to_string()))?;
        cfg.environment.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TerrainError> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| TerrainError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn build(&self) -> Result<TerrainField, TerrainError> {
        match &self.field {
            FieldSpec::Transect(spec) => make_transect(spec, &self.environment),
            FieldSpec::Patchy(spec) => make_patchy(spec, &self.environment),
        }
    }

    /// The sampling path, falling back to the full transect.
    pub fn sampling_path(&self) -> Result<PathSpec, TerrainError> {
        match (&self.path, &self.field) {
            (Some(p), _) => Ok(*p),
            (None, FieldSpec::Transect(spec)) => Ok(PathSpec::along_transect(spec.length)),
            (None, FieldSpec::Patchy(_)) => Err(TerrainError::Specification(
                "grid fields need an explicit sampling path".into(),
            )),
        }
    }
}
