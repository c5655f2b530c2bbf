//! Proprioceptive measurement chain of a two-joint leg.
//!
//! The leg never sees the ground-truth force directly: the truth curve is
//! turned into joint torques along a scripted penetration, corrupted with
//! sensor noise, inverted back through the Jacobian and rotated into the
//! estimated ground frame.

mod kinematics;
mod measure;

pub use kinematics::{
    estimate_tip_force, estimate_tip_force_with, forward_kinematics, inverse_kinematics, jacobian, joint_torques,
    LegGeometry, LegState, DEFAULT_SINGULARITY_THRESHOLD,
};
pub use measure::{simulate_measurement, GaitKind, GaitProtocol, LegReading, MeasurementSetup};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Serialize, Deserialize)]
pub enum LegError {
    #[error("near-singular leg configuration (|det J| = {det:e})")]
    Singular { det: f64 },
    #[error("tip target out of reach at depth {depth} m")]
    Unreachable { depth: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("location out of bounds: {0}")]
    OutOfBounds(String),
}
