use serde::{Deserialize, Serialize};

use super::analysis::{detect_ruptures_with_window, line_fit, relative_residual};
use super::{ForceDepthCurve, IntrusionError};

pub const MIN_CLASSIFY_SAMPLES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeLabel {
    Linear,
    Plateau,
    Brittle,
    CrustThenLinear,
}

/// Thresholds of the regime decision rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegimeRules {
    /// Terminal-third slope below this fraction of the first-third slope is a plateau.
    pub plateau_ratio: f64,
    /// Relative RMS residual a post-crust remainder may have and still count as linear.
    pub linear_residual: f64,
    /// Rupture threshold as a fraction of the curve's peak force.
    pub min_drop_fraction: f64,
    /// Absolute floor on the rupture threshold, N.
    pub min_drop_floor: f64,
    pub rupture_window: usize,
}

impl Default for RegimeRules {
    fn default() -> Self {
        RegimeRules {
            plateau_ratio: 0.1,
            linear_residual: 0.05,
            // Multiplicative noise of ±2% can fake drops up to 4% of the local force.
            min_drop_fraction: 0.08,
            min_drop_floor: 1e-3,
            rupture_window: super::DEFAULT_RUPTURE_WINDOW,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeVerdict {
    pub label: RegimeLabel,
    /// Margin-based score in [0, 1].
    pub confidence: f64,
    pub rupture_count: usize,
    /// Terminal-third slope over first-third slope.
    pub slope_ratio: f64,
}

pub fn classify_regime(curve: &ForceDepthCurve) -> Result<RegimeVerdict, IntrusionError> {
    classify_regime_with(curve, &RegimeRules::default())
}

/// Rules, in order:
///
/// * **Brittle** for two or more ruptures; confidence `1 - 0.5^(n-1)`.
/// * **CrustThenLinear** for exactly one rupture in the first third with a
///   remainder whose line fit residual is under `linear_residual`;
///   confidence `1 - residual / linear_residual`.
/// * **Plateau** for no ruptures and a slope ratio under `plateau_ratio`;
///   confidence `1 - max(ratio, 0) / plateau_ratio`.
/// * **Linear** otherwise; confidence
///   `(ratio - plateau_ratio) / (1 - plateau_ratio)` clamped, halved when an
///   unexplained rupture is present.
pub fn classify_regime_with(curve: &ForceDepthCurve, rules: &RegimeRules) -> Result<RegimeVerdict, IntrusionError> {
    let n = curve.len();
    if n < MIN_CLASSIFY_SAMPLES {
        return Err(IntrusionError::Analysis(format!(
            "regime classification needs {MIN_CLASSIFY_SAMPLES} samples, got {n}"
        )));
    }
    let min_drop = (rules.min_drop_fraction * curve.max_force()).max(rules.min_drop_floor);
    let ruptures = detect_ruptures_with_window(curve, min_drop, rules.rupture_window);
    let third = n / 3;
    let slope_of = |range: std::ops::Range<usize>| {
        line_fit(&curve.depth[range.clone()], &curve.force[range])
            .map(|(s, _)| s)
            .unwrap_or(0.0)
    };
    let first = slope_of(0..third);
    let last = slope_of(n - third..n);
    let slope_ratio = if first > 0.0 { last / first } else { 0.0 };
    let verdict = |label, confidence: f64| RegimeVerdict {
        label,
        confidence: confidence.clamp(0.0, 1.0),
        rupture_count: ruptures.len(),
        slope_ratio,
    };

    if ruptures.len() >= 2 {
        let extra = (ruptures.len() - 1) as i32;
        return Ok(verdict(RegimeLabel::Brittle, 1.0 - 0.5f64.powi(extra)));
    }
    if let [event] = ruptures.as_slice() {
        if event.index < third {
            // Skip the drop itself before judging the remainder.
            let start = (event.index + rules.rupture_window + 1).min(n);
            let x = &curve.depth[start..];
            let y = &curve.force[start..];
            if let Some((s, b)) = line_fit(x, y) {
                let residual = relative_residual(x, y, s, b);
                if residual < rules.linear_residual && s > 0.0 {
                    return Ok(verdict(
                        RegimeLabel::CrustThenLinear,
                        1.0 - residual / rules.linear_residual,
                    ));
                }
            }
        }
    }
    if ruptures.is_empty() && slope_ratio < rules.plateau_ratio {
        return Ok(verdict(
            RegimeLabel::Plateau,
            1.0 - slope_ratio.max(0.0) / rules.plateau_ratio,
        ));
    }
    let mut confidence = (slope_ratio.min(1.0) - rules.plateau_ratio) / (1.0 - rules.plateau_ratio);
    if !ruptures.is_empty() {
        confidence *= 0.5;
    }
    Ok(verdict(RegimeLabel::Linear, confidence))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intrusion::{synthesize, IntruderSpec, IntrusionProtocol, SynthesisConfig};
    use crate::terrain::{ClassParams, EnvironmentConfig, MaterialColumn};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sand() -> MaterialColumn {
        MaterialColumn::cohesionless(0.59, 2650.0, 250e-6, 0.52, 10.0)
    }

    fn classify(column: MaterialColumn) -> RegimeVerdict {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = synthesize(
            &column,
            &IntruderSpec::LAB_CYLINDER,
            &IntrusionProtocol::default(),
            &EnvironmentConfig::default(),
            &SynthesisConfig::noiseless(),
            &mut rng,
        )
        .unwrap();
        classify_regime(&c).unwrap()
    }

    #[test]
    fn noiseless_linear() {
        let v = classify(sand());
        assert_eq!(v.label, RegimeLabel::Linear);
        assert!(v.confidence >= 0.9, "{v:?}");
    }

    #[test]
    fn noiseless_plateau() {
        let v = classify(sand().with_params(ClassParams::CohesivePowder { yield_force: 2.0 }));
        assert_eq!(v.label, RegimeLabel::Plateau);
        assert!(v.confidence >= 0.9, "{v:?}");
    }

    #[test]
    fn noiseless_crust() {
        let v = classify(sand().with_params(ClassParams::SaltCrusted {
            crust_thickness: 0.02,
            crust_strength: 15.0,
            substrate: Box::new(sand()),
        }));
        assert_eq!(v.label, RegimeLabel::CrustThenLinear, "{v:?}");
    }

    #[test]
    fn noiseless_ice() {
        let v = classify(sand().with_params(ClassParams::IceCemented { ice_fraction: 0.10 }));
        assert_eq!(v.label, RegimeLabel::Brittle, "{v:?}");
    }

    #[test]
    fn too_short() {
        let c = ForceDepthCurve::from_pairs(
            &[(0.0, 0.0), (0.01, 1.0)],
            IntrusionProtocol::default(),
            crate::intrusion::Provenance::Truth,
        )
        .unwrap();
        assert!(classify_regime(&c).is_err());
    }
}
