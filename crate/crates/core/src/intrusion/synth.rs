use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ForceDepthCurve, IntruderSpec, IntrusionError, IntrusionProtocol, Provenance};
use crate::terrain::{ClassParams, EnvironmentConfig, MaterialColumn};

/// Generator constants. The ice and snow values are fixtures tuned so that
/// strength and drop intensity both grow with ice fraction; they are not
/// measured material properties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthesisConfig {
    /// Half-width of the multiplicative uniform noise per sample.
    pub noise: f64,
    /// Baseline strengthening per unit ice fraction.
    pub ice_strengthening: f64,
    /// Drops per metre of depth per unit ice fraction.
    pub ice_drop_density: f64,
    /// Sawtooth amplitude, as a fraction of the baseline, per unit ice fraction.
    pub ice_drop_amplitude: f64,
    /// Force scale of snow relative to ice-cemented ground.
    pub snow_force_scale: f64,
    /// Drop period of snow relative to ice-cemented ground.
    pub snow_period_scale: f64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            noise: 0.02,
            ice_strengthening: 20.0,
            ice_drop_density: 2000.0,
            ice_drop_amplitude: 1.5,
            snow_force_scale: 0.1,
            snow_period_scale: 0.5,
        }
    }
}

impl SynthesisConfig {
    pub fn noiseless() -> Self {
        SynthesisConfig {
            noise: 0.0,
            ..Self::default()
        }
    }
}

/// Displaced-volume force for cohesionless grains, including the transient
/// while the stagnant cone grows over the first `r tan(θ)` of depth.
fn archimedes_force(column: &MaterialColumn, intruder: &IntruderSpec, gravity: f64, h: f64) -> f64 {
    let area = intruder.area();
    let cone_h = intruder.cone_height(column.friction_angle);
    let cone_v = intruder.cone_volume(column.friction_angle);
    let volume = if h < cone_h {
        h / cone_h * cone_v + h * area
    } else {
        cone_v + h * area
    };
    column.k * column.phi * column.rho_p * gravity * volume
}

fn ice_force(
    column: &MaterialColumn,
    intruder: &IntruderSpec,
    gravity: f64,
    h: f64,
    ice_fraction: f64,
    period_scale: f64,
    cfg: &SynthesisConfig,
) -> f64 {
    let baseline = archimedes_force(column, intruder, gravity, h) * (1.0 + cfg.ice_strengthening * ice_fraction);
    let density = cfg.ice_drop_density * ice_fraction;
    if density <= 0.0 {
        return baseline;
    }
    let period = period_scale / density;
    // Each tooth loads elastically then drops back to the baseline.
    let phase = (h / period).fract();
    baseline * (1.0 + cfg.ice_drop_amplitude * ice_fraction * phase)
}

/// Noise-free force at depth `h`. `spacing` is the sample spacing, used to
/// place the crust puncture within a single sample.
pub fn noiseless_force(
    column: &MaterialColumn,
    intruder: &IntruderSpec,
    gravity: f64,
    cfg: &SynthesisConfig,
    spacing: f64,
    h: f64,
) -> f64 {
    match &column.params {
        ClassParams::Cohesionless => archimedes_force(column, intruder, gravity, h),
        ClassParams::CohesivePowder { yield_force } => archimedes_force(column, intruder, gravity, h).min(*yield_force),
        ClassParams::IceCemented { ice_fraction } => ice_force(column, intruder, gravity, h, *ice_fraction, 1.0, cfg),
        ClassParams::Snow { ice_fraction } => {
            cfg.snow_force_scale * ice_force(column, intruder, gravity, h, *ice_fraction, cfg.snow_period_scale, cfg)
        }
        ClassParams::SaltCrusted {
            crust_thickness,
            crust_strength,
            substrate,
        } => {
            let t = *crust_thickness;
            if t > 0.0 && h <= t {
                return crust_strength * h / t;
            }
            let below = noiseless_force(substrate, intruder, gravity, cfg, spacing, h - t);
            if t > 0.0 && h - t <= spacing {
                // Puncture sample: at least half the crust strength is lost.
                below.min(0.5 * crust_strength)
            } else {
                below
            }
        }
    }
}

/// Synthesize a ground-truth curve for one intrusion.
pub fn synthesize<R: Rng + ?Sized>(
    column: &MaterialColumn,
    intruder: &IntruderSpec,
    protocol: &IntrusionProtocol,
    env: &EnvironmentConfig,
    cfg: &SynthesisConfig,
    rng: &mut R,
) -> Result<ForceDepthCurve, IntrusionError> {
    column
        .validate()
        .map_err(|e| IntrusionError::InvalidInput(e.to_string()))?;
    intruder.validate()?;
    protocol.validate()?;
    env.validate()
        .map_err(|e| IntrusionError::InvalidInput(e.to_string()))?;
    if !(0.0..1.0).contains(&cfg.noise) {
        return Err(IntrusionError::InvalidInput(format!(
            "noise half-width must be in [0, 1), got {}",
            cfg.noise
        )));
    }
    if !protocol.is_quasistatic(column.grain_d, env.gravity) {
        tracing::warn!(
            speed = protocol.speed,
            critical = IntrusionProtocol::critical_speed(column.grain_d, env.gravity),
            "intrusion speed is outside the quasistatic regime"
        );
    }

    let spacing = protocol.spacing();
    let depth = protocol.depths();
    let force = depth
        .iter()
        .map(|&h| {
            let f = noiseless_force(column, intruder, env.gravity, cfg, spacing, h);
            if cfg.noise > 0.0 {
                f * (1.0 + rng.random_range(-cfg.noise..=cfg.noise))
            } else {
                f
            }
        })
        .collect();
    ForceDepthCurve::new(depth, force, *protocol, Provenance::Truth)
}
