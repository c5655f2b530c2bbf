use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use super::export::{export, ExportKind};
use super::session::Session;
use super::CampaignError;

const EVENTS_FILE: &str = "events.jsonl";
const EXPORTS_DIR: &str = "exports";

/// One directory per session under `root`: the event log plus exports.
#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, CampaignError> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Store { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn session_dir(&self, id: &str) -> PathBuf {
        self.root.join(id)
    }

    pub fn events_path(&self, id: &str) -> PathBuf {
        self.session_dir(id).join(EVENTS_FILE)
    }

    pub fn exports_dir(&self, id: &str) -> PathBuf {
        self.session_dir(id).join(EXPORTS_DIR)
    }

    pub fn exists(&self, id: &str) -> bool {
        valid_id(id) && self.events_path(id).is_file()
    }

    /// Ids of all stored sessions, sorted.
    pub fn ids(&self) -> Result<Vec<String>, CampaignError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.root)? {
            let name = entry?.file_name().to_string_lossy().into_owned();
            if self.exists(&name) {
                ids.push(name);
            }
        }
        ids.sort();
        Ok(ids)
    }

    pub fn read_log(&self, id: &str) -> Result<String, CampaignError> {
        if !self.exists(id) {
            return Err(CampaignError::NotFound(format!("session {id}")));
        }
        Ok(fs::read_to_string(self.events_path(id))?)
    }

    pub fn load(&self, id: &str) -> Result<Session, CampaignError> {
        Session::from_jsonl(&self.read_log(id)?)
    }

    /// Write a new session's log.
    pub fn create(&self, session: &Session) -> Result<(), CampaignError> {
        let id = session.id();
        if self.exists(id) {
            return Err(CampaignError::Conflict(format!("session {id} already exists")));
        }
        fs::create_dir_all(self.session_dir(id))?;
        fs::write(self.events_path(id), session.events_jsonl(0))?;
        Ok(())
    }

    /// Append the events of `session` not yet on disk.
    pub fn save(&self, session: &Session) -> Result<(), CampaignError> {
        let id = session.id();
        if !self.exists(id) {
            return self.create(session);
        }
        let on_disk = self.read_log(id)?.lines().filter(|l| !l.trim().is_empty()).count();
        if on_disk > session.events().len() {
            return Err(CampaignError::Conflict(format!(
                "session {id} has {on_disk} events on disk but only {} in memory",
                session.events().len()
            )));
        }
        let tail = session.events_jsonl(on_disk);
        if !tail.is_empty() {
            let mut file = OpenOptions::new().append(true).open(self.events_path(id))?;
            file.write_all(tail.as_bytes())?;
            file.sync_data()?;
        }
        Ok(())
    }

    /// Export into the session's `exports/` directory.
    pub fn export(&self, id: &str, what: &[ExportKind]) -> Result<Vec<PathBuf>, CampaignError> {
        let session = self.load(id)?;
        export(&session, &self.exports_dir(id), what)
    }
}
