//! Regolith sensing through locomotion.
//!
//! * [`terrain`] builds synthetic ground-truth fields.
//! * [`intrusion`] synthesizes and analyzes force–depth curves.
//! * [`leg`] runs the proprioceptive measurement chain of a two-joint leg.
//! * [`sampler`] ranks where to measure next and explains why.
//! * [`campaign`] ties it together in an event-sourced session with a CLI
//!   and an HTTP service.

pub mod campaign;
pub mod intrusion;
pub mod leg;
pub mod sampler;
pub mod terrain;
