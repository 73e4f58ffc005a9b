//! Live multiplayer consensus game.
//!
//! A session seats humans and lazy bots, deals each seat a private ranking
//! of cards, and plays `τ` timed rounds. In every round each player may apply
//! to change her card; one applicant is drawn at random and re-votes. The
//! game ends when every seat holds the same card or the rounds run out, and
//! players earn points by how much they like the winning card.
//!
//! [`GameSession`] is the whole game as a deterministic, event-sourced state
//! machine. The server in [`server`] wraps each session in a tokio task,
//! speaks JSON over WebSockets to players and serves admin routes over HTTP.

mod classify;
mod config;
mod error;
mod metrics;
mod reward;
pub mod server;
mod session;
mod store;
pub mod wire;

pub use classify::{classify_change, Irrationality, IrrationalityFlag};
pub use config::{FillMode, PreferencePool, ServerConfig, SessionConfig};
pub use error::GameError;
pub use metrics::{compute_metrics, price_of_reality, GameMetrics, IrrationalCounts};
pub use reward::{reward, value_ladder};
pub use session::{
    ActionRecord, BallotMove, Event, GameSession, LogRecord, Phase, PlayerAction, Seat, SeatKind,
};
pub use store::{persist_new, EventStore, FileStore, MemoryStore};

/// Plays one bot-only game to the end.
pub fn run_bot_game(
    id: impl Into<String>,
    config: SessionConfig,
    seed: u64,
) -> Result<GameSession, GameError> {
    let config = SessionConfig {
        fill: FillMode::BotOnly,
        ..config
    };
    let mut session = GameSession::new(id, config, seed)?;
    session.start()?;
    session.run_to_end()?;
    Ok(session)
}
