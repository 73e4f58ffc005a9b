//! JSON messages exchanged with players over a WebSocket.
//!
//! Every message is one text frame holding an object with a `"type"` field.
//! Cards are referred to by name. `round` in client messages is the `t` of
//! the `round_state` being answered (rounds left, counting the current one).
//! `tallies` lists vote counts in the order of `cards` from `game_start`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Join { name: String, token: String },
    ApplyChange { round: u32, candidate: String },
    Keep { round: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PickedChange {
    pub from: String,
    pub to: String,
    /// The receiving player's own change was picked.
    pub yours: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    LobbyState {
        session: String,
        players: Vec<String>,
        seats: usize,
        /// Humans required before the game starts.
        needed: usize,
    },
    GameStart {
        seat: usize,
        cards: Vec<String>,
        /// The player's ranking, best first.
        preferences: Vec<String>,
        /// Points for each entry of `preferences` if it wins.
        values: Vec<u32>,
        tau: u32,
    },
    RoundState {
        t: u32,
        tallies: Vec<u32>,
        your_ballot: String,
        seconds_left: u64,
    },
    RoundResult {
        t: u32,
        picked_change: Option<PickedChange>,
        tallies: Vec<u32>,
    },
    GameOver {
        winner: Option<String>,
        points: u32,
    },
    Error {
        message: String,
    },
}
