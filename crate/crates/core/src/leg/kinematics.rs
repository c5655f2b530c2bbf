use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::LegError;

/// Smallest `|det J|` (m²) at which tip forces are still estimated.
pub const DEFAULT_SINGULARITY_THRESHOLD: f64 = 1e-4;

/// Planar two-link leg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegGeometry {
    pub l1: f64,
    pub l2: f64,
}

impl Default for LegGeometry {
    fn default() -> Self {
        LegGeometry { l1: 0.2, l2: 0.2 }
    }
}

impl LegGeometry {
    pub fn validate(&self) -> Result<(), LegError> {
        if self.l1 > 0.0 && self.l2 > 0.0 {
            Ok(())
        } else {
            Err(LegError::InvalidInput(format!(
                "link lengths must be positive: {self:?}"
            )))
        }
    }
}

/// Joint angles (rad) and measured joint torques (N·m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegState {
    pub q1: f64,
    pub q2: f64,
    pub tau1: f64,
    pub tau2: f64,
}

pub fn forward_kinematics(geom: &LegGeometry, q1: f64, q2: f64) -> (f64, f64) {
    let q12 = q1 + q2;
    (
        geom.l1 * q1.cos() + geom.l2 * q12.cos(),
        geom.l1 * q1.sin() + geom.l2 * q12.sin(),
    )
}

/// Tip Jacobian `∂(x, z)/∂(q1, q2)`.
pub fn jacobian(geom: &LegGeometry, q1: f64, q2: f64) -> Matrix2<f64> {
    let q12 = q1 + q2;
    let (s1, c1) = q1.sin_cos();
    let (s12, c12) = q12.sin_cos();
    Matrix2::new(
        -geom.l1 * s1 - geom.l2 * s12,
        -geom.l2 * s12,
        geom.l1 * c1 + geom.l2 * c12,
        geom.l2 * c12,
    )
}

/// Joint torques that balance a tip force `(fx, fz)`: `τ = Jᵀ F`.
pub fn joint_torques(geom: &LegGeometry, q1: f64, q2: f64, force: (f64, f64)) -> (f64, f64) {
    let tau = jacobian(geom, q1, q2).transpose() * Vector2::new(force.0, force.1);
    (tau[0], tau[1])
}

pub fn estimate_tip_force(geom: &LegGeometry, state: &LegState) -> Result<(f64, f64), LegError> {
    estimate_tip_force_with(geom, state, DEFAULT_SINGULARITY_THRESHOLD)
}

/// Tip force from joint torques, `F = J⁻ᵀ τ`. Refuses near-singular poses
/// instead of regularizing, which would bias the force.
pub fn estimate_tip_force_with(
    geom: &LegGeometry,
    state: &LegState,
    singularity_threshold: f64,
) -> Result<(f64, f64), LegError> {
    let j = jacobian(geom, state.q1, state.q2);
    let det = j.determinant();
    if det.abs() <= singularity_threshold {
        return Err(LegError::Singular { det: det.abs() });
    }
    let jt_inv = j
        .transpose()
        .try_inverse()
        .ok_or(LegError::Singular { det: det.abs() })?;
    let f = jt_inv * Vector2::new(state.tau1, state.tau2);
    Ok((f[0], f[1]))
}

/// Joint angles placing the tip at `(x, z)`, knee-bent configuration
/// (`q2 > 0`). `None` when the point is out of reach.
pub fn inverse_kinematics(geom: &LegGeometry, x: f64, z: f64) -> Option<(f64, f64)> {
    let r2 = x * x + z * z;
    let c2 = (r2 - geom.l1 * geom.l1 - geom.l2 * geom.l2) / (2.0 * geom.l1 * geom.l2);
    if !(-1.0..=1.0).contains(&c2) {
        return None;
    }
    let q2 = c2.acos();
    let q1 = z.atan2(x) - (geom.l2 * q2.sin()).atan2(geom.l1 + geom.l2 * q2.cos());
    Some((q1, q2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    const LEG: LegGeometry = LegGeometry { l1: 0.2, l2: 0.2 };

    #[test]
    fn stretched_and_vertical() {
        let (x, z) = forward_kinematics(&LEG, 0.0, 0.0);
        assert!((x - 0.4).abs() < 1e-15 && z.abs() < 1e-15);
        let (x, z) = forward_kinematics(&LEG, FRAC_PI_2, 0.0);
        assert!(x.abs() < 1e-15 && (z - 0.4).abs() < 1e-15);
    }

    #[test]
    fn bent_knee_hand_value() {
        let (x, z) = forward_kinematics(&LEG, FRAC_PI_4, FRAC_PI_2);
        assert!(x.abs() < 1e-12);
        assert!((z - 0.282_842_712_474_619).abs() < 1e-12);
    }

    #[test]
    fn zero_torque_zero_force() {
        let s = LegState {
            q1: -1.0,
            q2: 1.2,
            tau1: 0.0,
            tau2: 0.0,
        };
        assert_eq!(estimate_tip_force(&LEG, &s).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn vertical_force_round_trip() {
        let (q1, q2) = (-1.9, 1.4);
        let (tau1, tau2) = joint_torques(&LEG, q1, q2, (0.0, 10.0));
        let (fx, fz) = estimate_tip_force(&LEG, &LegState { q1, q2, tau1, tau2 }).unwrap();
        assert!(fx.abs() < 1e-9 && (fz - 10.0).abs() < 1e-9);
    }

    #[test]
    fn straight_leg_is_singular() {
        let s = LegState {
            q1: 0.3,
            q2: 0.0,
            tau1: 1.0,
            tau2: 1.0,
        };
        match estimate_tip_force(&LEG, &s) {
            Err(LegError::Singular { det }) => assert!(det < 1e-12),
            other => panic!("expected singularity, got {other:?}"),
        }
    }

    #[test]
    fn ik_inverts_fk() {
        for &(x, z) in &[(0.05, -0.28), (0.1, -0.35), (-0.05, -0.2)] {
            let (q1, q2) = inverse_kinematics(&LEG, x, z).unwrap();
            let (fx, fz) = forward_kinematics(&LEG, q1, q2);
            assert!((fx - x).abs() < 1e-12 && (fz - z).abs() < 1e-12);
        }
        assert!(inverse_kinematics(&LEG, 0.5, 0.0).is_none());
    }
}
