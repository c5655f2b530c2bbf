//! Regolith material descriptions: the ground truth a leg pushes into.

use std::f64::consts::FRAC_PI_3;

use serde::{Deserialize, Serialize};

use super::TerrainError;

/// Packing bounds every column must respect.
pub const PHI_BOUNDS: (f64, f64) = (0.50, 0.70);
/// Largest ice fraction a column may carry.
pub const MAX_ICE_FRACTION: f64 = 0.20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaterialClass {
    Cohesionless,
    CohesivePowder,
    IceCemented,
    SaltCrusted,
    Snow,
}

impl MaterialClass {
    pub const ALL: [MaterialClass; 5] = [
        MaterialClass::Cohesionless,
        MaterialClass::CohesivePowder,
        MaterialClass::IceCemented,
        MaterialClass::SaltCrusted,
        MaterialClass::Snow,
    ];
}

/// Parameters that only exist for some material classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum ClassParams {
    Cohesionless,
    CohesivePowder {
        /// Plateau force from the yield stress, N.
        yield_force: f64,
    },
    IceCemented {
        ice_fraction: f64,
    },
    SaltCrusted {
        /// m
        crust_thickness: f64,
        /// Peak force at puncture, N.
        crust_strength: f64,
        /// Material beneath the crust.
        substrate: Box<MaterialColumn>,
    },
    Snow {
        ice_fraction: f64,
    },
}

/// Ground-truth regolith at one location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialColumn {
    /// Particle volume fraction.
    pub phi: f64,
    /// Particle density, kg/m³.
    pub rho_p: f64,
    /// Mean grain diameter, m.
    pub grain_d: f64,
    /// Internal friction angle, rad.
    pub friction_angle: f64,
    /// Archimedes constant relating displaced weight to penetration force.
    pub k: f64,
    #[serde(flatten)]
    pub params: ClassParams,
}

impl MaterialColumn {
    pub fn cohesionless(phi: f64, rho_p: f64, grain_d: f64, friction_angle: f64, k: f64) -> Self {
        MaterialColumn {
            phi,
            rho_p,
            grain_d,
            friction_angle,
            k,
            params: ClassParams::Cohesionless,
        }
    }

    pub fn with_params(mut self, params: ClassParams) -> Self {
        self.params = params;
        self
    }

    pub fn class(&self) -> MaterialClass {
        match self.params {
            ClassParams::Cohesionless => MaterialClass::Cohesionless,
            ClassParams::CohesivePowder { .. } => MaterialClass::CohesivePowder,
            ClassParams::IceCemented { .. } => MaterialClass::IceCemented,
            ClassParams::SaltCrusted { .. } => MaterialClass::SaltCrusted,
            ClassParams::Snow { .. } => MaterialClass::Snow,
        }
    }

    pub fn substrate(&self) -> Option<&MaterialColumn> {
        match &self.params {
            ClassParams::SaltCrusted { substrate, .. } => Some(substrate),
            _ => None,
        }
    }

    pub fn ice_fraction(&self) -> Option<f64> {
        match self.params {
            ClassParams::IceCemented { ice_fraction } | ClassParams::Snow { ice_fraction } => Some(ice_fraction),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), TerrainError> {
        self.validate_at_depth(0)
    }

    fn validate_at_depth(&self, depth: usize) -> Result<(), TerrainError> {
        let bad = |what: &str, value: f64| Err(TerrainError::InvalidColumn(format!("{what} = {value}")));
        if !(PHI_BOUNDS.0..=PHI_BOUNDS.1).contains(&self.phi) {
            return bad("phi outside [0.50, 0.70]", self.phi);
        }
        if !(self.rho_p > 0.0 && self.rho_p.is_finite()) {
            return bad("rho_p must be positive", self.rho_p);
        }
        if !(self.grain_d > 0.0 && self.grain_d.is_finite()) {
            return bad("grain_d must be positive", self.grain_d);
        }
        if !(self.friction_angle > 0.0 && self.friction_angle < FRAC_PI_3) {
            return bad("friction_angle outside (0, pi/3)", self.friction_angle);
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return bad("k must be positive", self.k);
        }
        match &self.params {
            ClassParams::Cohesionless => {}
            ClassParams::CohesivePowder { yield_force } => {
                if !(*yield_force >= 0.0 && yield_force.is_finite()) {
                    return bad("yield_force must be >= 0", *yield_force);
                }
            }
            ClassParams::IceCemented { ice_fraction } | ClassParams::Snow { ice_fraction } => {
                if !(0.0..=MAX_ICE_FRACTION).contains(ice_fraction) {
                    return bad("ice_fraction outside [0, 0.20]", *ice_fraction);
                }
            }
            ClassParams::SaltCrusted {
                crust_thickness,
                crust_strength,
                substrate,
            } => {
                if !(*crust_thickness >= 0.0 && crust_thickness.is_finite()) {
                    return bad("crust_thickness must be >= 0", *crust_thickness);
                }
                if !(*crust_strength >= 0.0 && crust_strength.is_finite()) {
                    return bad("crust_strength must be >= 0", *crust_strength);
                }
                if depth >= 1 {
                    return Err(TerrainError::InvalidColumn(
                        "crust substrate nesting deeper than one level".into(),
                    ));
                }
                if substrate.class() == MaterialClass::SaltCrusted {
                    return Err(TerrainError::InvalidColumn(
                        "crust substrate cannot itself be crusted".into(),
                    ));
                }
                substrate.validate_at_depth(depth + 1)?;
            }
        }
        Ok(())
    }

    /// Linear blend of two columns of identical structure; `t = 0` gives `self`.
    pub fn lerp(&self, other: &MaterialColumn, t: f64) -> Result<MaterialColumn, TerrainError> {
        let mix = |a: f64, b: f64| a + (b - a) * t;
        let params = match (&self.params, &other.params) {
            (ClassParams::Cohesionless, ClassParams::Cohesionless) => ClassParams::Cohesionless,
            (ClassParams::CohesivePowder { yield_force: a }, ClassParams::CohesivePowder { yield_force: b }) => {
                ClassParams::CohesivePowder {
                    yield_force: mix(*a, *b),
                }
            }
            (ClassParams::IceCemented { ice_fraction: a }, ClassParams::IceCemented { ice_fraction: b }) => {
                ClassParams::IceCemented {
                    ice_fraction: mix(*a, *b),
                }
            }
            (ClassParams::Snow { ice_fraction: a }, ClassParams::Snow { ice_fraction: b }) => ClassParams::Snow {
                ice_fraction: mix(*a, *b),
            },
            (
                ClassParams::SaltCrusted {
                    crust_thickness: ta,
                    crust_strength: fa,
                    substrate: sa,
                },
                ClassParams::SaltCrusted {
                    crust_thickness: tb,
                    crust_strength: fb,
                    substrate: sb,
                },
            ) => ClassParams::SaltCrusted {
                crust_thickness: mix(*ta, *tb),
                crust_strength: mix(*fa, *fb),
                substrate: Box::new(sa.lerp(sb, t)?),
            },
            _ => {
                return Err(TerrainError::Specification(format!(
                    "cannot interpolate {:?} into {:?}",
                    self.class(),
                    other.class()
                )))
            }
        };
        Ok(MaterialColumn {
            phi: mix(self.phi, other.phi),
            rho_p: mix(self.rho_p, other.rho_p),
            grain_d: mix(self.grain_d, other.grain_d),
            friction_angle: mix(self.friction_angle, other.friction_angle),
            k: mix(self.k, other.k),
            params,
        })
    }
}

/// Packing-dependent strength of one granular material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialPreset {
    pub phi_min: f64,
    pub phi_max: f64,
    /// K at the loosest packing.
    pub k_loose: f64,
    /// K at the densest packing.
    pub k_dense: f64,
}

impl MaterialPreset {
    /// Fixture for monodisperse quartz sand; not a measured value.
    pub const QUARTZ_SAND: MaterialPreset = MaterialPreset {
        phi_min: 0.55,
        phi_max: 0.64,
        k_loose: 5.0,
        k_dense: 20.0,
    };

    /// Exponential growth rate that pins both endpoints.
    pub fn growth_rate(&self) -> f64 {
        (self.k_dense / self.k_loose).ln() / (self.phi_max - self.phi_min)
    }
}

/// Archimedes constant as a function of packing fraction.
///
/// `K = k_loose * exp(beta * (phi - phi_min))`, with `beta` chosen so the
/// dense end lands on `k_dense`. Strictly increasing and convex whenever
/// `k_dense > k_loose`.
pub fn k_of_phi(phi: f64, preset: &MaterialPreset) -> Result<f64, TerrainError> {
    if !(preset.phi_min < preset.phi_max && preset.k_loose > 0.0 && preset.k_dense > preset.k_loose) {
        return Err(TerrainError::Specification(format!(
            "material preset must have phi_min < phi_max and 0 < k_loose < k_dense: {preset:?}"
        )));
    }
    if !(preset.phi_min..=preset.phi_max).contains(&phi) {
        return Err(TerrainError::Domain(format!(
            "phi {phi} outside [{}, {}]",
            preset.phi_min, preset.phi_max
        )));
    }
    if phi == preset.phi_max {
        return Ok(preset.k_dense);
    }
    Ok(preset.k_loose * (preset.growth_rate() * (phi - preset.phi_min)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sand() -> MaterialColumn {
        MaterialColumn::cohesionless(0.59, 2650.0, 250e-6, 0.52, 10.0)
    }

    #[test]
    fn k_of_phi_anchors_and_midpoint() {
        let p = MaterialPreset {
            phi_min: 0.55,
            phi_max: 0.65,
            k_loose: 5.0,
            k_dense: 20.0,
        };
        assert_eq!(k_of_phi(0.55, &p).unwrap(), 5.0);
        assert_eq!(k_of_phi(0.65, &p).unwrap(), 20.0);
        // 5 * exp(0.5 * ln 4) = 5 * 2
        let mid = k_of_phi(0.60, &p).unwrap();
        assert!((mid - 10.0).abs() < 1e-12, "{mid}");
    }

    #[test]
    fn k_of_phi_out_of_range() {
        let p = MaterialPreset::QUARTZ_SAND;
        assert!(matches!(k_of_phi(0.54, &p), Err(TerrainError::Domain(_))));
        assert!(matches!(k_of_phi(0.65, &p), Err(TerrainError::Domain(_))));
    }

    #[test]
    fn class_params_follow_class() {
        let crusted = sand().with_params(ClassParams::SaltCrusted {
            crust_thickness: 0.02,
            crust_strength: 15.0,
            substrate: Box::new(sand()),
        });
        assert_eq!(crusted.class(), MaterialClass::SaltCrusted);
        assert!(crusted.validate().is_ok());

        let nested = sand().with_params(ClassParams::SaltCrusted {
            crust_thickness: 0.02,
            crust_strength: 15.0,
            substrate: Box::new(crusted.clone()),
        });
        assert!(nested.validate().is_err());
    }

    #[test]
    fn validation_rejects_bad_ranges() {
        let mut c = sand();
        c.phi = 0.72;
        assert!(c.validate().is_err());
        let mut c = sand();
        c.friction_angle = 1.1;
        assert!(c.validate().is_err());
        let c = sand().with_params(ClassParams::IceCemented { ice_fraction: 0.25 });
        assert!(c.validate().is_err());
    }

    #[test]
    fn lerp_requires_matching_class() {
        let a = sand();
        let b = sand().with_params(ClassParams::Snow { ice_fraction: 0.05 });
        assert!(a.lerp(&b, 0.5).is_err());
        let mut c = sand();
        c.k = 20.0;
        assert_eq!(a.lerp(&c, 0.5).unwrap().k, 15.0);
    }

    #[test]
    fn column_round_trips_through_toml() {
        let c = sand().with_params(ClassParams::SaltCrusted {
            crust_thickness: 0.01,
            crust_strength: 32.0,
            substrate: Box::new(sand()),
        });
        let text = toml::to_string(&c).unwrap();
        let back: MaterialColumn = toml::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}
