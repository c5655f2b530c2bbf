use serde::{Deserialize, Serialize};

use super::{valid_points, Measurement, SamplerError};

/// Expected shape of strength along the transect, as a template in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum HypothesisShape {
    MonotoneIncreasing,
    MonotoneDecreasing,
    Unimodal {
        peak: f64,
    },
    /// `(x, t)` knots, both normalized; linear between knots, flat outside.
    PiecewiseLinear {
        knots: Vec<[f64; 2]>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    #[serde(flatten)]
    pub shape: HypothesisShape,
    #[serde(default)]
    pub description: String,
}

impl Hypothesis {
    pub fn new(shape: HypothesisShape, description: impl Into<String>) -> Self {
        Hypothesis {
            shape,
            description: description.into(),
        }
    }

    pub fn increasing() -> Self {
        Self::new(
            HypothesisShape::MonotoneIncreasing,
            "strength increases along the transect",
        )
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        match &self.shape {
            HypothesisShape::Unimodal { peak } if !(0.0..=1.0).contains(peak) => {
                Err(SamplerError::Validation(format!("unimodal peak {peak} outside [0, 1]")))
            }
            HypothesisShape::PiecewiseLinear { knots } => {
                if knots.is_empty() {
                    return Err(SamplerError::Validation("piecewise template has no knots".into()));
                }
                if knots
                    .iter()
                    .any(|[x, t]| !(0.0..=1.0).contains(x) || !(0.0..=1.0).contains(t))
                {
                    return Err(SamplerError::Validation(
                        "piecewise knots must lie in [0, 1] x [0, 1]".into(),
                    ));
                }
                if knots.windows(2).any(|w| !(w[1][0] > w[0][0])) {
                    return Err(SamplerError::Validation(
                        "piecewise knots must have increasing x".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Template value at normalized `x`.
    pub fn template(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match &self.shape {
            HypothesisShape::MonotoneIncreasing => x,
            HypothesisShape::MonotoneDecreasing => 1.0 - x,
            HypothesisShape::Unimodal { peak } => {
                if x <= *peak {
                    if *peak > 0.0 {
                        x / peak
                    } else {
                        1.0
                    }
                } else if *peak < 1.0 {
                    (1.0 - x) / (1.0 - peak)
                } else {
                    1.0
                }
            }
            HypothesisShape::PiecewiseLinear { knots } => {
                let Some(first) = knots.first() else {
                    return 0.0;
                };
                if x <= first[0] {
                    return first[1];
                }
                for w in knots.windows(2) {
                    let ([x0, t0], [x1, t1]) = (w[0], w[1]);
                    if x <= x1 {
                        return t0 + (t1 - t0) * (x - x0) / (x1 - x0);
                    }
                }
                knots.last().map(|k| k[1]).unwrap_or(0.0)
            }
        }
    }
}

/// `strength ≈ scale * template(x) + offset` with `scale >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineFit {
    pub scale: f64,
    pub offset: f64,
}

impl AffineFit {
    pub fn predict(&self, hypothesis: &Hypothesis, x: f64) -> f64 {
        self.scale * hypothesis.template(x) + self.offset
    }
}

/// Least-squares fit of the template to `(x, strength)` points, constrained
/// to a non-negative scale so an anti-correlated hypothesis is not silently
/// flipped. With the constraint active the fit is the mean.
pub fn fit_template(hypothesis: &Hypothesis, points: &[(f64, f64)]) -> Option<AffineFit> {
    if points.is_empty() {
        return None;
    }
    let n = points.len() as f64;
    let t: Vec<f64> = points.iter().map(|&(x, _)| hypothesis.template(x)).collect();
    let mt = t.iter().sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (stt, sty) = t.iter().zip(points).fold((0.0, 0.0), |(stt, sty), (ti, &(_, y))| {
        (stt + (ti - mt).powi(2), sty + (ti - mt) * (y - my))
    });
    let scale = if stt > 0.0 { (sty / stt).max(0.0) } else { 0.0 };
    Some(AffineFit {
        scale,
        offset: my - scale * mt,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Confidence {
    pub value: f64,
    /// All strengths were equal, so the ratio is undefined.
    pub degenerate: bool,
}

/// `1 - RMS(residual) / RMS(strength - mean)` of the fitted template at the
/// measured locations, clamped to [0, 1].
pub fn hypothesis_confidence(
    hypothesis: &Hypothesis,
    measurements: &[Measurement],
) -> Result<Confidence, SamplerError> {
    let points = valid_points(measurements);
    if points.len() < 2 {
        return Err(SamplerError::State(format!(
            "hypothesis confidence needs 2 valid measurements, got {}",
            points.len()
        )));
    }
    let fit = fit_template(hypothesis, &points).expect("nonempty");
    let n = points.len() as f64;
    let mean = points.iter().map(|p| p.1).sum::<f64>() / n;
    let ss_res: f64 = points
        .iter()
        .map(|&(x, y)| (y - fit.predict(hypothesis, x)).powi(2))
        .sum();
    let ss_tot: f64 = points.iter().map(|&(_, y)| (y - mean).powi(2)).sum();
    let scale = points.iter().map(|p| p.1.abs()).fold(0.0, f64::max).max(1.0);
    if ss_tot <= (1e-12 * scale).powi(2) * n {
        let perfect = ss_res <= (1e-12 * scale).powi(2) * n;
        return Ok(Confidence {
            value: if perfect { 1.0 } else { 0.0 },
            degenerate: true,
        });
    }
    let ratio = (ss_res / ss_tot).sqrt();
    Ok(Confidence {
        value: (1.0 - ratio).clamp(0.0, 1.0),
        degenerate: false,
    })
}
