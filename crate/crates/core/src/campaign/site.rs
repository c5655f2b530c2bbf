use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CampaignError;
use crate::intrusion::{IntruderSpec, IntrusionProtocol};
use crate::leg::{GaitKind, GaitProtocol, MeasurementSetup};
use crate::sampler::{Hypothesis, SamplerConfig, SamplingGeometry};
use crate::terrain::{FieldSpec, TerrainConfig, TerrainField};

/// Intruder and protocol used at a site; everything else comes from the
/// [`MeasurementSetup`] defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSection {
    pub intruder: IntruderSpec,
    #[serde(default)]
    pub protocol: IntrusionProtocol,
}

fn default_candidates() -> usize {
    101
}

/// `[campaign]` table of a site file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSection {
    /// Number of evenly spaced candidate locations along the path.
    #[serde(default = "default_candidates")]
    pub candidates: usize,
    #[serde(default)]
    pub hypothesis: Option<Hypothesis>,
    /// Enables the boundary-proximity factor on exploration.
    #[serde(default)]
    pub boundary_scale: Option<f64>,
    #[serde(default)]
    pub measurement: Option<MeasurementSection>,
    /// Default initial plan, metres along the sampling path.
    #[serde(default)]
    pub flags: Vec<f64>,
}

impl Default for CampaignSection {
    fn default() -> Self {
        CampaignSection {
            candidates: default_candidates(),
            hypothesis: None,
            boundary_scale: None,
            measurement: None,
            flags: Vec::new(),
        }
    }
}

#[derive(Deserialize)]
struct CampaignOnly {
    #[serde(default)]
    campaign: CampaignSection,
}

/// A site file: terrain plus the campaign defaults that go with it.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteConfig {
    pub terrain: TerrainConfig,
    pub campaign: CampaignSection,
    /// The file as written; sessions log it verbatim.
    pub source: String,
}

impl SiteConfig {
    pub fn from_toml(text: &str) -> Result<Self, CampaignError> {
        let terrain = TerrainConfig::from_toml(text)?;
        let CampaignOnly { campaign } = toml::from_str(text).map_err(|e| CampaignError::Validation(e.to_string()))?;
        if campaign.candidates < 2 {
            return Err(CampaignError::Validation(
                "a campaign needs at least 2 candidates".into(),
            ));
        }
        Ok(SiteConfig {
            terrain,
            campaign,
            source: text.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CampaignError> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| CampaignError::Validation(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// A preset name or a path to a site file.
    pub fn resolve(name_or_path: &str) -> Result<Self, CampaignError> {
        match presets::by_name(name_or_path) {
            Some(text) => Self::from_toml(text),
            None => Self::load(name_or_path),
        }
    }

    pub fn measurement(&self) -> MeasurementSetup {
        let mut setup = MeasurementSetup {
            environment: self.terrain.environment,
            ..MeasurementSetup::default()
        };
        if let Some(m) = self.campaign.measurement {
            setup.intruder = m.intruder;
            setup.protocol = m.protocol;
        }
        setup
    }

    pub fn sampler_config(&self) -> SamplerConfig {
        SamplerConfig {
            boundary_scale: self.campaign.boundary_scale,
            ..SamplerConfig::default()
        }
    }

    /// Flag locations as normalized path coordinates.
    pub fn flags(&self) -> Result<Vec<f64>, CampaignError> {
        let length = self.terrain.sampling_path()?.length();
        self.campaign
            .flags
            .iter()
            .map(|&m| {
                if (0.0..=length).contains(&m) {
                    Ok(m / length)
                } else {
                    Err(CampaignError::Validation(format!(
                        "flag at {m} m is off the {length} m path"
                    )))
                }
            })
            .collect()
    }

    pub fn hypothesis(&self) -> Hypothesis {
        self.campaign.hypothesis.clone().unwrap_or_else(Hypothesis::increasing)
    }

    /// Candidate grid along the sampling path. Grid fields also declare the
    /// class changes along the path as region-of-interest boundaries.
    pub fn geometry(&self, field: &TerrainField) -> Result<SamplingGeometry, CampaignError> {
        let path = self.terrain.sampling_path()?;
        let geometry = SamplingGeometry::uniform(path.length(), self.campaign.candidates);
        Ok(match self.terrain.field {
            FieldSpec::Patchy(_) => {
                let boundaries = field.class_boundaries_on_path(&path, 1000)?;
                geometry.with_boundaries(boundaries)
            }
            FieldSpec::Transect(_) => geometry,
        })
    }
}

/// Site files and gait tables that ship with the crate.
pub mod presets {
    use super::*;

    pub const WHITE_SANDS_TRANSECT: &str = include_str!("../../presets/white_sands_transect.toml");
    pub const MT_HOOD_PATCHY: &str = include_str!("../../presets/mt_hood_patchy.toml");
    pub const GAITS: &str = include_str!("../../presets/gaits.toml");

    pub const NAMES: [&str; 2] = ["white_sands_transect", "mt_hood_patchy"];

    pub fn by_name(name: &str) -> Option<&'static str> {
        match name {
            "white_sands_transect" | "white_sands" => Some(WHITE_SANDS_TRANSECT),
            "mt_hood_patchy" | "mt_hood" => Some(MT_HOOD_PATCHY),
            _ => None,
        }
    }

    pub fn white_sands() -> Result<SiteConfig, CampaignError> {
        SiteConfig::from_toml(WHITE_SANDS_TRANSECT)
    }

    pub fn mt_hood() -> Result<SiteConfig, CampaignError> {
        SiteConfig::from_toml(MT_HOOD_PATCHY)
    }

    #[derive(Deserialize)]
    struct GaitTable {
        standalone_penetrate: GaitProtocol,
        crawl_n_sense: GaitProtocol,
        trot_walk: GaitProtocol,
    }

    /// The shipped gait table, or one read from `text`.
    pub fn gaits_from(text: &str) -> Result<Vec<GaitProtocol>, CampaignError> {
        let t: GaitTable = toml::from_str(text).map_err(|e| CampaignError::Validation(e.to_string()))?;
        let all = vec![t.standalone_penetrate, t.crawl_n_sense, t.trot_walk];
        for g in &all {
            g.validate()?;
        }
        Ok(all)
    }

    pub fn gait(kind: GaitKind) -> GaitProtocol {
        gaits_from(GAITS)
            .ok()
            .and_then(|all| all.into_iter().find(|g| g.kind == kind))
            .unwrap_or_else(|| GaitProtocol::for_kind(kind))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terrain::MaterialClass;

    #[test]
    fn presets_parse() {
        for name in presets::NAMES {
            let site = SiteConfig::resolve(name).unwrap();
            let field = site.terrain.build().unwrap();
            let g = site.geometry(&field).unwrap();
            g.validate().unwrap();
        }
    }

    #[test]
    fn shipped_gaits_match_builtin() {
        for kind in [GaitKind::StandalonePenetrate, GaitKind::CrawlNSense, GaitKind::TrotWalk] {
            assert_eq!(presets::gait(kind), GaitProtocol::for_kind(kind));
        }
    }

    #[test]
    fn white_sands_layout() {
        let site = presets::white_sands().unwrap();
        let field = site.terrain.build().unwrap();
        let at = |m: f64| field.column_at_m(m).unwrap();
        assert_eq!(at(1.0).class(), MaterialClass::Cohesionless);
        assert_eq!(at(5.0).class(), MaterialClass::SaltCrusted);
        assert_eq!(at(50.0).class(), MaterialClass::Cohesionless);
        // The crust is strongest at 33 m.
        let strength = |m: f64| match at(m).params {
            crate::terrain::ClassParams::SaltCrusted { crust_strength, .. } => crust_strength,
            _ => 0.0,
        };
        let peak = strength(33.0);
        for i in 0..=550 {
            assert!(strength(i as f64 * 0.1) <= peak + 1e-9);
        }
    }

    #[test]
    fn mt_hood_has_boundaries_on_path() {
        let site = presets::mt_hood().unwrap();
        let field = site.terrain.build().unwrap();
        let g = site.geometry(&field).unwrap();
        assert!(g.roi_boundaries.len() >= 3, "{:?}", g.roi_boundaries);
        assert_eq!(site.sampler_config().boundary_scale, Some(0.05));
    }
}
