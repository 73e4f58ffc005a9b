use std::path::PathBuf;

use cud_core::ModelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("session {0} not found")]
    NotFound(String),
    #[error("session is full")]
    SessionFull,
    #[error("player {0:?} already joined this session")]
    DuplicateIdentity(String),
    #[error("join token does not match for {0:?}")]
    BadToken(String),
    #[error("game already started")]
    AlreadyStarted,
    #[error("game has not started")]
    NotStarted,
    #[error("game is over")]
    Finished,
    #[error("action for round {got}, current round is {current}")]
    WrongRound { got: u32, current: u32 },
    #[error("seat {0} already acted this round")]
    AlreadyActed(usize),
    #[error("seat {0} is not a human seat")]
    NotHuman(usize),
    #[error("no seat {0}")]
    NoSeat(usize),
    #[error("player {name:?} reached the limit of {limit} games")]
    GameLimit { name: String, limit: u32 },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("event log: record {seq}: {reason}")]
    Corrupt { seq: u64, reason: String },
    #[error("event log: expected record {expected}, found {found}")]
    OutOfOrder { expected: u64, found: u64 },
    #[error("event log ends before the game finished")]
    Truncated,
    #[error("event log is empty")]
    EmptyLog,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl GameError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GameError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn corrupt(seq: u64, reason: impl Into<String>) -> Self {
        GameError::Corrupt {
            seq,
            reason: reason.into(),
        }
    }
}
