//! Ground-truth regolith fields.
//!
//! A [`TerrainField`] is built once from a declarative spec (usually a TOML
//! file, see [`TerrainConfig`]) and is read-only afterwards, so it can be
//! shared freely between threads.

mod config;
mod field;
mod material;

pub use config::{FieldSpec, TerrainConfig};
pub use field::{
    make_patchy, make_transect, Geometry, GradientSpec, Patch, PatchSpec, PathSpec, Segment, TerrainField,
};
pub use material::{
    k_of_phi, ClassParams, MaterialClass, MaterialColumn, MaterialPreset, MAX_ICE_FRACTION, PHI_BOUNDS,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TerrainError {
    #[error("invalid terrain specification: {0}")]
    Specification(String),
    #[error("invalid material column: {0}")]
    InvalidColumn(String),
    #[error("value outside model domain: {0}")]
    Domain(String),
    #[error("coordinate out of bounds: {0}")]
    OutOfBounds(String),
    #[error("failed to read terrain config: {0}")]
    Config(String),
}

fn default_gravity() -> f64 {
    9.81
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentConfig {
    /// m/s²
    #[serde(default = "default_gravity")]
    pub gravity: f64,
    #[serde(default)]
    pub rng_seed: u64,
}

impl Default for EnvironmentConfig {
    fn default() -> Self {
        EnvironmentConfig {
            gravity: default_gravity(),
            rng_seed: 0,
        }
    }
}

impl EnvironmentConfig {
    pub fn validate(&self) -> Result<(), TerrainError> {
        if self.gravity > 0.0 && self.gravity.is_finite() {
            Ok(())
        } else {
            Err(TerrainError::Specification(format!(
                "gravity must be positive, got {}",
                self.gravity
            )))
        }
    }
}
