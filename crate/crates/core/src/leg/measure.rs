use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::kinematics::{
    estimate_tip_force_with, inverse_kinematics, joint_torques, LegGeometry, LegState, DEFAULT_SINGULARITY_THRESHOLD,
};
use super::LegError;
use crate::intrusion::{
    fit_stiffness, strength_summary, synthesize, ForceDepthCurve, IntruderSpec, IntrusionProtocol, Provenance,
    StrengthSummary, SynthesisConfig, MIN_FIT_SAMPLES,
};
use crate::terrain::{EnvironmentConfig, PathSpec, TerrainField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaitKind {
    StandalonePenetrate,
    CrawlNSense,
    TrotWalk,
}

impl std::fmt::Display for GaitKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GaitKind::StandalonePenetrate => "standalone_penetrate",
            GaitKind::CrawlNSense => "crawl_n_sense",
            GaitKind::TrotWalk => "trot_walk",
        })
    }
}

/// Sensing gait and its noise model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitProtocol {
    pub kind: GaitKind,
    /// Hz
    pub sample_rate: f64,
    /// Joint torque noise, N·m (Gaussian std).
    pub torque_noise: f64,
    /// Ground-plane tilt estimate error, rad. Zero unless trotting.
    #[serde(default)]
    pub tilt_noise: f64,
    /// Unmodelled inertial force per sample, N. Zero unless trotting.
    #[serde(default)]
    pub inertial_noise: f64,
    /// Time spent at a location besides the penetration itself, s.
    #[serde(default)]
    pub overhead_s: f64,
}

impl GaitProtocol {
    pub fn standalone() -> Self {
        GaitProtocol {
            kind: GaitKind::StandalonePenetrate,
            sample_rate: 300.0,
            torque_noise: 0.0005,
            tilt_noise: 0.0,
            inertial_noise: 0.0,
            overhead_s: 60.0,
        }
    }

    /// Three feet on the ground fix the plane exactly.
    pub fn crawl_n_sense() -> Self {
        GaitProtocol {
            kind: GaitKind::CrawlNSense,
            sample_rate: 100.0,
            torque_noise: 0.001,
            tilt_noise: 0.0,
            inertial_noise: 0.0,
            overhead_s: 15.0,
        }
    }

    /// Two diagonal feet: plane reconstructed afterwards, body momentum leaks in.
    pub fn trot_walk() -> Self {
        GaitProtocol {
            kind: GaitKind::TrotWalk,
            sample_rate: 100.0,
            torque_noise: 0.001,
            tilt_noise: 0.05,
            inertial_noise: 0.5,
            overhead_s: 1.0,
        }
    }

    pub fn for_kind(kind: GaitKind) -> Self {
        match kind {
            GaitKind::StandalonePenetrate => Self::standalone(),
            GaitKind::CrawlNSense => Self::crawl_n_sense(),
            GaitKind::TrotWalk => Self::trot_walk(),
        }
    }

    /// Same gait with every noise term zeroed.
    pub fn noiseless(mut self) -> Self {
        self.torque_noise = 0.0;
        self.tilt_noise = 0.0;
        self.inertial_noise = 0.0;
        self
    }

    pub fn validate(&self) -> Result<(), LegError> {
        let sigmas = [self.torque_noise, self.tilt_noise, self.inertial_noise];
        if sigmas.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(LegError::InvalidInput(format!("noise terms must be >= 0: {self:?}")));
        }
        if !(self.sample_rate > 0.0) {
            return Err(LegError::InvalidInput("sample rate must be positive".into()));
        }
        if self.kind != GaitKind::TrotWalk && (self.tilt_noise != 0.0 || self.inertial_noise != 0.0) {
            return Err(LegError::InvalidInput(format!(
                "{} knows the ground plane exactly; tilt and inertial noise must be 0",
                self.kind
            )));
        }
        Ok(())
    }
}

/// Everything about a measurement that does not change between locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetup {
    #[serde(default)]
    pub leg: LegGeometry,
    pub intruder: IntruderSpec,
    #[serde(default)]
    pub protocol: IntrusionProtocol,
    #[serde(default)]
    pub environment: EnvironmentConfig,
    #[serde(default)]
    pub synthesis: SynthesisConfig,
    /// Tip position at first ground contact in the leg base frame, m.
    #[serde(default = "default_contact")]
    pub contact_point: (f64, f64),
    #[serde(default = "default_singularity")]
    pub singularity_threshold: f64,
}

fn default_contact() -> (f64, f64) {
    (0.05, -0.28)
}

fn default_singularity() -> f64 {
    DEFAULT_SINGULARITY_THRESHOLD
}

impl Default for MeasurementSetup {
    fn default() -> Self {
        MeasurementSetup {
            leg: LegGeometry::default(),
            intruder: IntruderSpec::LAB_CYLINDER,
            protocol: IntrusionProtocol::default(),
            environment: EnvironmentConfig::default(),
            synthesis: SynthesisConfig::default(),
            contact_point: default_contact(),
            singularity_threshold: DEFAULT_SINGULARITY_THRESHOLD,
        }
    }
}

/// Outcome of one leg measurement at one location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegReading {
    /// Normalized path coordinate.
    pub location: f64,
    pub gait: GaitKind,
    pub truth: ForceDepthCurve,
    pub estimate: ForceDepthCurve,
    /// Present only for complete measurements.
    pub summary: Option<StrengthSummary>,
    /// One-way spring stiffness of the estimate, N/m.
    pub strength: f64,
    pub valid: bool,
    /// Why the measurement was cut short.
    pub abort: Option<LegError>,
    /// Wall-clock cost at this location, s.
    pub cost_s: f64,
}

fn normal(sigma: f64) -> Option<Normal<f64>> {
    (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("finite sigma"))
}

/// Simulate the leg probing `field` at normalized `location` along `path`.
///
/// A singular or unreachable pose part way through aborts the measurement:
/// the partial estimate is returned with `valid = false` and never yields a
/// strength.
#[allow(clippy::too_many_arguments)]
pub fn simulate_measurement<R: Rng + ?Sized>(
    field: &TerrainField,
    path: &PathSpec,
    location: f64,
    gait: &GaitProtocol,
    ground_tilt: f64,
    setup: &MeasurementSetup,
    rng: &mut R,
) -> Result<LegReading, LegError> {
    gait.validate()?;
    setup.leg.validate()?;
    let column = field
        .column_on_path(path, location)
        .map_err(|e| LegError::OutOfBounds(e.to_string()))?;

    let protocol = IntrusionProtocol {
        sample_rate: gait.sample_rate,
        ..setup.protocol
    };
    let mut truth = synthesize(
        &column,
        &setup.intruder,
        &protocol,
        &setup.environment,
        &setup.synthesis,
        rng,
    )
    .map_err(|e| LegError::InvalidInput(e.to_string()))?;
    truth.column_ref = Some(format!("s={location}"));

    let torque = normal(gait.torque_noise);
    let inertial = normal(gait.inertial_noise);
    let tilt_estimate = match normal(gait.tilt_noise) {
        Some(n) => ground_tilt + n.sample(rng),
        None => ground_tilt,
    };

    // Ground normal in the body frame, true and estimated.
    let normal_true = (-ground_tilt.sin(), ground_tilt.cos());
    let normal_est = (-tilt_estimate.sin(), tilt_estimate.cos());
    let (x0, z0) = setup.contact_point;

    let mut depth = Vec::with_capacity(truth.len());
    let mut force = Vec::with_capacity(truth.len());
    let mut abort = None;
    for (h, f_true) in truth.samples() {
        let tip = (x0 - h * normal_true.0, z0 - h * normal_true.1);
        let Some((q1, q2)) = inverse_kinematics(&setup.leg, tip.0, tip.1) else {
            abort = Some(LegError::Unreachable { depth: h });
            break;
        };
        let reaction = (f_true * normal_true.0, f_true * normal_true.1);
        let (mut tau1, mut tau2) = joint_torques(&setup.leg, q1, q2, reaction);
        if let Some(n) = &torque {
            tau1 += n.sample(rng);
            tau2 += n.sample(rng);
        }
        let state = LegState { q1, q2, tau1, tau2 };
        let (fx, fz) = match estimate_tip_force_with(&setup.leg, &state, setup.singularity_threshold) {
            Ok(f) => f,
            Err(e) => {
                abort = Some(e);
                break;
            }
        };
        let mut f_normal = fx * normal_est.0 + fz * normal_est.1;
        if let Some(n) = &inertial {
            f_normal += n.sample(rng);
        }
        depth.push(h);
        // Granular media cannot pull on the tip.
        force.push(f_normal.max(0.0));
    }

    let valid = abort.is_none() && depth.len() >= MIN_FIT_SAMPLES;
    let estimate = ForceDepthCurve {
        depth,
        force,
        protocol,
        provenance: Provenance::LegEstimate,
        column_ref: truth.column_ref.clone(),
        valid,
    };
    let (summary, strength) = if valid {
        let s = strength_summary(&estimate);
        let k = fit_stiffness(&estimate).unwrap_or(s.fitted_k);
        (Some(s), k.max(0.0))
    } else {
        (None, 0.0)
    };
    Ok(LegReading {
        location,
        gait: gait.kind,
        truth,
        estimate,
        summary,
        strength,
        valid,
        abort,
        cost_s: gait.overhead_s + protocol.max_depth / protocol.speed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terrain::{make_transect, GradientSpec, MaterialClass, MaterialColumn, Segment};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn field() -> (TerrainField, PathSpec) {
        let spec = GradientSpec {
            length: 10.0,
            segments: vec![Segment {
                span: [0.0, 1.0],
                class: MaterialClass::Cohesionless,
                start: MaterialColumn::cohesionless(0.59, 2650.0, 250e-6, 0.52, 10.0),
                end: None,
            }],
        };
        (
            make_transect(&spec, &EnvironmentConfig::default()).unwrap(),
            PathSpec::along_transect(10.0),
        )
    }

    fn noiseless_setup() -> MeasurementSetup {
        MeasurementSetup {
            synthesis: SynthesisConfig::noiseless(),
            ..MeasurementSetup::default()
        }
    }

    fn max_abs_error(r: &LegReading) -> f64 {
        r.truth
            .force
            .iter()
            .zip(&r.estimate.force)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn noiseless_chain_is_identity() {
        let (f, p) = field();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let gait = GaitProtocol::trot_walk().noiseless();
        let r = simulate_measurement(&f, &p, 0.5, &gait, 0.0, &noiseless_setup(), &mut rng).unwrap();
        assert!(r.valid);
        assert_eq!(r.truth.len(), r.estimate.len());
        assert!(max_abs_error(&r) < 1e-9);
    }

    #[test]
    fn crawl_compensates_tilt_exactly() {
        let (f, p) = field();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let gait = GaitProtocol::crawl_n_sense().noiseless();
        let r = simulate_measurement(&f, &p, 0.5, &gait, 0.1, &noiseless_setup(), &mut rng).unwrap();
        assert!(max_abs_error(&r) < 1e-9);
    }

    #[test]
    fn unreachable_depth_aborts() {
        let (f, p) = field();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let setup = MeasurementSetup {
            contact_point: (0.0, -0.36),
            singularity_threshold: 1e-12,
            ..noiseless_setup()
        };
        let gait = GaitProtocol::crawl_n_sense();
        let r = simulate_measurement(&f, &p, 0.5, &gait, 0.0, &setup, &mut rng).unwrap();
        assert!(!r.valid);
        assert!(!r.estimate.valid);
        assert!(r.estimate.len() < r.truth.len());
        assert!(r.summary.is_none());
        assert!(matches!(r.abort, Some(LegError::Unreachable { .. })));
    }

    #[test]
    fn singular_pose_aborts() {
        let (f, p) = field();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // Leg nearly straight at 0.3995 m reach: knee angle tiny.
        let setup = MeasurementSetup {
            contact_point: (0.0, -0.3995),
            singularity_threshold: 3e-3,
            ..noiseless_setup()
        };
        let r = simulate_measurement(&f, &p, 0.5, &GaitProtocol::standalone(), 0.0, &setup, &mut rng).unwrap();
        assert!(!r.valid);
        assert!(matches!(r.abort, Some(LegError::Singular { .. })));
    }

    #[test]
    fn out_of_bounds_location() {
        let (f, p) = field();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let err = simulate_measurement(
            &f,
            &p,
            1.2,
            &GaitProtocol::standalone(),
            0.0,
            &noiseless_setup(),
            &mut rng,
        );
        assert!(matches!(err, Err(LegError::OutOfBounds(_))));
    }

    #[test]
    fn crawl_only_gaits_reject_tilt_noise() {
        let mut g = GaitProtocol::crawl_n_sense();
        g.tilt_noise = 0.01;
        assert!(g.validate().is_err());
    }

    #[test]
    fn trot_is_cheaper() {
        let (f, p) = field();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = noiseless_setup();
        let crawl = simulate_measurement(&f, &p, 0.5, &GaitProtocol::crawl_n_sense(), 0.0, &s, &mut rng).unwrap();
        let trot = simulate_measurement(&f, &p, 0.5, &GaitProtocol::trot_walk(), 0.0, &s, &mut rng).unwrap();
        assert!(trot.cost_s < crawl.cost_s);
    }
}
