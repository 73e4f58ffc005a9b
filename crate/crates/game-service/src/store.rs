//! Append-only event storage: one line-delimited JSON file per session plus
//! an index file listing sessions in creation order.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::{GameError, LogRecord};

pub trait EventStore: Send + Sync {
    fn append(&self, session: &str, record: &LogRecord) -> Result<(), GameError>;
    fn load(&self, session: &str) -> Result<Vec<LogRecord>, GameError>;
    /// The raw log, one JSON record per line.
    fn raw(&self, session: &str) -> Result<String, GameError>;
    fn sessions(&self) -> Result<Vec<String>, GameError>;
}

fn check_id(session: &str) -> Result<(), GameError> {
    let ok = !session.is_empty()
        && session
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if ok {
        Ok(())
    } else {
        Err(GameError::NotFound(session.to_string()))
    }
}

fn parse_lines(text: &str) -> Result<Vec<LogRecord>, GameError> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line)
                .map_err(|e| GameError::corrupt(i as u64, format!("unreadable line: {e}")))
        })
        .collect()
}

#[derive(Debug)]
pub struct FileStore {
    root: PathBuf,
    index: Mutex<()>,
}

impl FileStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, GameError> {
        let root = root.into();
        let sessions = root.join("sessions");
        fs::create_dir_all(&sessions).map_err(|e| GameError::io(&sessions, e))?;
        Ok(FileStore {
            root,
            index: Mutex::new(()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn session_path(&self, session: &str) -> PathBuf {
        self.root.join("sessions").join(format!("{session}.jsonl"))
    }

    fn index_path(&self) -> PathBuf {
        self.root.join("index.jsonl")
    }

    fn append_line(path: &Path, line: &str) -> Result<(), GameError> {
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| GameError::io(path, e))?;
        writeln!(file, "{line}").map_err(|e| GameError::io(path, e))?;
        file.flush().map_err(|e| GameError::io(path, e))
    }
}

impl EventStore for FileStore {
    fn append(&self, session: &str, record: &LogRecord) -> Result<(), GameError> {
        check_id(session)?;
        if record.seq == 0 {
            let _guard = self.index.lock().expect("index lock poisoned");
            let entry = serde_json::json!({ "session": session });
            Self::append_line(&self.index_path(), &entry.to_string())?;
        }
        Self::append_line(&self.session_path(session), &serde_json::to_string(record)?)
    }

    fn load(&self, session: &str) -> Result<Vec<LogRecord>, GameError> {
        parse_lines(&self.raw(session)?)
    }

    fn raw(&self, session: &str) -> Result<String, GameError> {
        check_id(session)?;
        let path = self.session_path(session);
        match fs::read_to_string(&path) {
            Ok(text) => Ok(text),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                Err(GameError::NotFound(session.to_string()))
            }
            Err(e) => Err(GameError::io(path, e)),
        }
    }

    fn sessions(&self) -> Result<Vec<String>, GameError> {
        let path = self.index_path();
        let file = match File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(GameError::io(path, e)),
        };
        let mut out = Vec::new();
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| GameError::io(&path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: serde_json::Value = serde_json::from_str(&line)?;
            if let Some(id) = entry["session"].as_str() {
                out.push(id.to_string());
            }
        }
        Ok(out)
    }
}

/// Keeps logs in memory; for tests and throwaway servers.
#[derive(Debug, Default)]
pub struct MemoryStore {
    logs: Mutex<BTreeMap<String, (usize, Vec<String>)>>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }
}

impl EventStore for MemoryStore {
    fn append(&self, session: &str, record: &LogRecord) -> Result<(), GameError> {
        let line = serde_json::to_string(record)?;
        let mut logs = self.logs.lock().expect("store lock poisoned");
        let next = logs.len();
        logs.entry(session.to_string())
            .or_insert_with(|| (next, Vec::new()))
            .1
            .push(line);
        Ok(())
    }

    fn load(&self, session: &str) -> Result<Vec<LogRecord>, GameError> {
        parse_lines(&self.raw(session)?)
    }

    fn raw(&self, session: &str) -> Result<String, GameError> {
        let logs = self.logs.lock().expect("store lock poisoned");
        let (_, lines) = logs
            .get(session)
            .ok_or_else(|| GameError::NotFound(session.to_string()))?;
        Ok(lines.iter().map(|l| format!("{l}\n")).collect())
    }

    fn sessions(&self) -> Result<Vec<String>, GameError> {
        let logs = self.logs.lock().expect("store lock poisoned");
        let mut ids: Vec<(usize, String)> = logs.iter().map(|(k, v)| (v.0, k.clone())).collect();
        ids.sort();
        Ok(ids.into_iter().map(|(_, id)| id).collect())
    }
}

/// Writes every record of `log` not yet persisted; returns the new count.
pub fn persist_new(
    store: &dyn EventStore,
    session: &str,
    log: &[LogRecord],
    written: usize,
) -> Result<usize, GameError> {
    for record in &log[written..] {
        store.append(session, record)?;
    }
    Ok(log.len())
}
