//! Durable sessions: an append-only event log per session plus periodic
//! snapshots. A session is recovered from its latest snapshot followed by
//! the events logged after it, or from the log alone.

use std::fs;
use std::path::{Path, PathBuf};

use adaptifont_core::session::{LogEvent, Session};

use crate::error::{Error, Result};
use crate::formats::jsonl::{append_jsonl, read_jsonl};

pub const DATA_DIR_ENV: &str = "ADAPTIFONT_DATA_DIR";

const EVENTS_FILE: &str = "events.jsonl";
const SNAPSHOT_FILE: &str = "snapshot.json";

#[derive(Clone, Debug)]
pub struct SessionStore {
    root: PathBuf,
    snapshot_every: u64,
}

pub fn valid_session_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

impl SessionStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        let sessions = root.join("sessions");
        fs::create_dir_all(&sessions).map_err(Error::io(&sessions))?;
        Ok(Self {
            root,
            snapshot_every: 25,
        })
    }

    /// Opens the store under `$ADAPTIFONT_DATA_DIR`, or `./adaptifont-data`.
    pub fn from_env() -> Result<Self> {
        let root = std::env::var_os(DATA_DIR_ENV).map_or_else(|| PathBuf::from("adaptifont-data"), PathBuf::from);
        Self::open(root)
    }

    pub fn with_snapshot_interval(mut self, every: u64) -> Self {
        self.snapshot_every = every.max(1);
        self
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dir(&self, id: &str) -> Result<PathBuf> {
        if !valid_session_id(id) {
            return Err(Error::Format(format!("invalid session id {id:?}")));
        }
        Ok(self.root.join("sessions").join(id))
    }

    pub fn exists(&self, id: &str) -> bool {
        self.dir(id).is_ok_and(|d| d.join(EVENTS_FILE).is_file())
    }

    /// Writes the session's pending events; returns how many were written.
    ///
    /// A snapshot is taken whenever the event count crosses a multiple of
    /// the snapshot interval.
    pub fn persist(&self, session: &mut Session) -> Result<usize> {
        let dir = self.dir(session.id())?;
        fs::create_dir_all(&dir).map_err(Error::io(&dir))?;
        let events = session.take_events();
        if events.is_empty() {
            return Ok(0);
        }
        append_jsonl(&dir.join(EVENTS_FILE), &events)?;
        let after = session.event_count();
        let before = after - events.len() as u64;
        if before / self.snapshot_every != after / self.snapshot_every || session.is_complete() {
            self.snapshot(session)?;
        }
        Ok(events.len())
    }

    pub fn snapshot(&self, session: &Session) -> Result<()> {
        let dir = self.dir(session.id())?;
        let tmp = dir.join("snapshot.json.tmp");
        let json = serde_json::to_vec(session).map_err(Error::json(&tmp))?;
        fs::write(&tmp, json).map_err(Error::io(&tmp))?;
        let path = dir.join(SNAPSHOT_FILE);
        fs::rename(&tmp, &path).map_err(Error::io(&path))
    }

    pub fn events(&self, id: &str) -> Result<Vec<LogEvent>> {
        read_jsonl(&self.dir(id)?.join(EVENTS_FILE))
    }

    /// Recovers a session, or `None` if it was never stored.
    pub fn load(&self, id: &str) -> Result<Option<Session>> {
        if !self.exists(id) {
            return Ok(None);
        }
        let events = self.events(id)?;
        let snap_path = self.dir(id)?.join(SNAPSHOT_FILE);
        if let Ok(bytes) = fs::read(&snap_path) {
            match serde_json::from_slice::<Session>(&bytes) {
                Ok(mut s) if (s.event_count() as usize) <= events.len() => {
                    for e in &events[s.event_count() as usize..] {
                        s.apply(e)?;
                    }
                    return Ok(Some(s));
                }
                Ok(_) => log::warn!("{}: snapshot is ahead of the log, replaying", snap_path.display()),
                Err(e) => log::warn!("{}: unreadable snapshot ({e}), replaying", snap_path.display()),
            }
        }
        Ok(Some(Session::from_events(&events)?))
    }

    /// Ids of all stored sessions, sorted.
    pub fn list(&self) -> Result<Vec<String>> {
        let dir = self.root.join("sessions");
        let mut ids: Vec<String> = fs::read_dir(&dir)
            .map_err(Error::io(&dir))?
            .filter_map(|e| e.ok())
            .filter(|e| e.path().join(EVENTS_FILE).is_file())
            .filter_map(|e| e.file_name().into_string().ok())
            .collect();
        ids.sort();
        Ok(ids)
    }
}
