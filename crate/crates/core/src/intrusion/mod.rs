//! Vertical intrusion: synthetic force–depth curves and their analysis.
//!
//! Cohesionless grains follow the displaced-volume law
//! `F_z = K φ ρ_p g (V_0 + h A)`, where `V_0` is the stagnant cone trapped
//! under the intruder at the friction angle. The other material classes are
//! built on top of that baseline: cohesive powders cap it at a yield plateau,
//! ice bridges add a sawtooth of brittle drops, and salt crusts put a stiff
//! skin with a single puncture on top of a substrate.

mod analysis;
pub mod io;
mod regime;
mod synth;

pub use analysis::{
    detect_ruptures, detect_ruptures_with_window, fit_k, fit_stiffness, strength_summary, KFit, RuptureEvent,
    StrengthSummary, DEFAULT_RUPTURE_WINDOW, MIN_FIT_SAMPLES,
};
pub use regime::{classify_regime, classify_regime_with, RegimeLabel, RegimeRules, RegimeVerdict};
pub use synth::{noiseless_force, synthesize, SynthesisConfig};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntrusionError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("analysis failed: {0}")]
    Analysis(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TipShape {
    FlatCylinder,
    /// Treated like a flat tip: a cone already occupies the stagnant region.
    Cone,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntruderSpec {
    /// m
    pub radius: f64,
    pub tip: TipShape,
}

impl IntruderSpec {
    /// The 2.54 cm aluminum cylinder used for cohesionless tests.
    pub const LAB_CYLINDER: IntruderSpec = IntruderSpec {
        radius: 0.0127,
        tip: TipShape::FlatCylinder,
    };
    /// The 0.71 cm cylinder used for frozen mixtures.
    pub const FROZEN_CYLINDER: IntruderSpec = IntruderSpec {
        radius: 0.00355,
        tip: TipShape::FlatCylinder,
    };

    pub fn flat(radius: f64) -> Self {
        IntruderSpec {
            radius,
            tip: TipShape::FlatCylinder,
        }
    }

    /// Cross-section, m².
    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    /// Depth over which the stagnant cone forms.
    pub fn cone_height(&self, friction_angle: f64) -> f64 {
        self.radius * friction_angle.tan()
    }

    /// Volume of the fully formed stagnant cone.
    pub fn cone_volume(&self, friction_angle: f64) -> f64 {
        PI / 3.0 * self.radius.powi(3) * friction_angle.tan()
    }

    pub fn validate(&self) -> Result<(), IntrusionError> {
        if self.radius > 0.0 && self.radius.is_finite() {
            Ok(())
        } else {
            Err(IntrusionError::InvalidInput(format!(
                "intruder radius must be positive, got {}",
                self.radius
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntrusionProtocol {
    /// m/s
    pub speed: f64,
    /// m
    pub max_depth: f64,
    /// Hz
    pub sample_rate: f64,
}

impl Default for IntrusionProtocol {
    /// 2 cm/s to 10 cm, sampled at 300 Hz.
    fn default() -> Self {
        IntrusionProtocol {
            speed: 0.02,
            max_depth: 0.10,
            sample_rate: 300.0,
        }
    }
}

impl IntrusionProtocol {
    pub fn spacing(&self) -> f64 {
        self.speed / self.sample_rate
    }

    /// Sample depths `0, Δ, 2Δ, …` up to `max_depth`.
    pub fn depths(&self) -> Vec<f64> {
        let spacing = self.spacing();
        let n = (self.max_depth / spacing + 1e-9).floor() as usize;
        (0..=n).map(|i| (i as f64 * spacing).min(self.max_depth)).collect()
    }

    /// Grain settling speed `sqrt(2 g d)`; intrusion must stay below it.
    pub fn critical_speed(grain_d: f64, gravity: f64) -> f64 {
        (2.0 * gravity * grain_d).sqrt()
    }

    pub fn is_quasistatic(&self, grain_d: f64, gravity: f64) -> bool {
        self.speed < Self::critical_speed(grain_d, gravity)
    }

    pub fn validate(&self) -> Result<(), IntrusionError> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if ok(self.speed) && ok(self.max_depth) && ok(self.sample_rate) {
            Ok(())
        } else {
            Err(IntrusionError::InvalidInput(format!(
                "protocol values must be positive: {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Truth,
    LegEstimate,
}

/// One intrusion record: forces sampled at strictly increasing depths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceDepthCurve {
    pub depth: Vec<f64>,
    pub force: Vec<f64>,
    pub protocol: IntrusionProtocol,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column_ref: Option<String>,
    /// False for a measurement aborted part way.
    #[serde(default = "default_true")]
    pub valid: bool,
}

fn default_true() -> bool {
    true
}

impl ForceDepthCurve {
    pub fn new(
        depth: Vec<f64>,
        force: Vec<f64>,
        protocol: IntrusionProtocol,
        provenance: Provenance,
    ) -> Result<Self, IntrusionError> {
        let curve = ForceDepthCurve {
            depth,
            force,
            protocol,
            provenance,
            column_ref: None,
            valid: true,
        };
        curve.check()?;
        Ok(curve)
    }

    /// Build from `(depth, force)` pairs; mostly handy in tests.
    pub fn from_pairs(
        pairs: &[(f64, f64)],
        protocol: IntrusionProtocol,
        provenance: Provenance,
    ) -> Result<Self, IntrusionError> {
        let (depth, force) = pairs.iter().copied().unzip();
        Self::new(depth, force, protocol, provenance)
    }

    pub fn check(&self) -> Result<(), IntrusionError> {
        if self.depth.len() != self.force.len() {
            return Err(IntrusionError::InvalidInput("depth and force lengths differ".into()));
        }
        if self.depth.is_empty() {
            return Ok(());
        }
        if self.depth[0] != 0.0 {
            return Err(IntrusionError::InvalidInput("curve must start at depth 0".into()));
        }
        if self.depth.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(IntrusionError::InvalidInput(
                "depths must be strictly increasing".into(),
            ));
        }
        if self.force[0] < 0.0 {
            return Err(IntrusionError::InvalidInput("negative force at the surface".into()));
        }
        if self.depth.iter().chain(&self.force).any(|v| !v.is_finite()) {
            return Err(IntrusionError::InvalidInput("non-finite sample".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.depth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depth.is_empty()
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.depth.iter().copied().zip(self.force.iter().copied())
    }

    pub fn max_force(&self) -> f64 {
        self.force.iter().copied().fold(0.0, f64::max)
    }
}
