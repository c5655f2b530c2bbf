//! Measurement campaigns: event-sourced sessions, persistence, exports and
//! the HTTP service.
//!
//! A [`Session`] is nothing but a fold over its [`Event`] log. Every
//! stochastic step logs the seed it used, so [`replay`] rebuilds the exact
//! same state without drawing fresh randomness.

mod export;
mod server;
mod session;
mod site;
mod store;

pub use export::{export, ExportKind};
pub use server::{router, serve, AppState};
pub use session::{
    canonical_json, derive_seed, replay, Clock, Event, EventKind, MeasurementOrigin, Session, SessionSpec,
    SessionState, SessionStatus,
};
pub use site::{presets, CampaignSection, MeasurementSection, SiteConfig};
pub use store::Store;

use thiserror::Error;

use crate::intrusion::IntrusionError;
use crate::leg::LegError;
use crate::sampler::SamplerError;
use crate::terrain::TerrainError;

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("not found: {0}")]
    NotFound(String),
    #[error("invalid request: {0}")]
    Validation(String),
    #[error("conflict: {0}")]
    Conflict(String),
    #[error("corrupt event log at index {index}: {reason}")]
    Corrupt { index: usize, reason: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Terrain(#[from] TerrainError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Leg(#[from] LegError),
    #[error(transparent)]
    Intrusion(#[from] IntrusionError),
}

impl CampaignError {
    pub(crate) fn corrupt(index: usize, reason: impl Into<String>) -> Self {
        CampaignError::Corrupt {
            index,
            reason: reason.into(),
        }
    }
}
