//! Session actors, WebSocket play and admin routes.
//!
//! Each session runs in its own task and owns its [`GameSession`]; players,
//! round clocks and admin queries reach it only through its command queue.
//! Every event is written to the [`EventStore`] before anyone is told about
//! it.
//!
//! Routes:
//!
//! | method | path | |
//! |---|---|---|
//! | GET | `/health` | liveness |
//! | POST | `/sessions` | create a session; optional JSON body of [`SessionOverrides`] |
//! | GET | `/sessions` | list sessions |
//! | GET | `/sessions/{id}/metrics` | metrics of a finished game |
//! | GET | `/sessions/{id}/log` | raw event log (line-delimited JSON) |
//! | GET | `/sessions/{id}/replay` | metrics recomputed from the stored log |
//! | GET | `/sessions/{id}/ws` | WebSocket for players ([`crate::wire`]) |

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use cud_core::{derive_seed, Outcome};
use futures_util::{SinkExt, StreamExt};
use serde::{Deserialize, Serialize};
use tokio::sync::{mpsc, oneshot};
use tokio::time::Instant;

use crate::wire::{ClientMessage, PickedChange, ServerMessage};
use crate::{
    persist_new, EventStore, FillMode, GameError, GameMetrics, GameSession, Phase, PlayerAction,
    PreferencePool, ServerConfig, SessionConfig,
};

/// Per-session changes to the server's default [`SessionConfig`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionOverrides {
    pub seats: Option<usize>,
    pub tau: Option<u32>,
    pub round_seconds: Option<u64>,
    pub fill: Option<FillMode>,
    pub start_humans: Option<usize>,
    pub cards: Option<Vec<String>>,
    pub pool: Option<PreferencePool>,
    pub seed: Option<u64>,
}

impl SessionOverrides {
    pub fn apply(&self, base: &SessionConfig) -> SessionConfig {
        let mut c = base.clone();
        if let Some(v) = self.seats {
            c.seats = v;
        }
        if let Some(v) = self.tau {
            c.tau = v;
        }
        if let Some(v) = self.round_seconds {
            c.round_seconds = v;
        }
        if let Some(v) = self.fill {
            c.fill = v;
        }
        if self.start_humans.is_some() {
            c.start_humans = self.start_humans;
        }
        if let Some(v) = &self.cards {
            c.cards = v.clone();
        }
        if let Some(v) = &self.pool {
            c.pool = v.clone();
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub id: String,
    #[serde(flatten)]
    pub phase: Phase,
    pub players: Vec<String>,
    pub seats: usize,
    pub metrics: Option<GameMetrics>,
}

impl SessionSummary {
    fn of(session: &GameSession) -> Self {
        SessionSummary {
            id: session.id().to_string(),
            phase: session.phase(),
            players: session
                .humans()
                .map(|i| session.seats()[i].name.clone())
                .collect(),
            seats: session.config().seats,
            metrics: session.metrics().cloned(),
        }
    }
}

/// Games played per player name across sessions.
#[derive(Debug, Default)]
struct PlayerRegistry {
    limit: Option<u32>,
    games: Mutex<HashMap<String, u32>>,
}

impl PlayerRegistry {
    fn check(&self, name: &str) -> Result<(), GameError> {
        let Some(limit) = self.limit else {
            return Ok(());
        };
        let games = self.games.lock().expect("registry lock poisoned");
        if games.get(name).copied().unwrap_or(0) >= limit {
            return Err(GameError::GameLimit {
                name: name.to_string(),
                limit,
            });
        }
        Ok(())
    }

    fn count(&self, names: impl IntoIterator<Item = String>) {
        let mut games = self.games.lock().expect("registry lock poisoned");
        for name in names {
            *games.entry(name).or_default() += 1;
        }
    }
}

enum Command {
    Join {
        name: String,
        token: String,
        conn: u64,
        outbound: mpsc::UnboundedSender<ServerMessage>,
        reply: oneshot::Sender<Result<usize, GameError>>,
    },
    Act {
        seat: usize,
        round: u32,
        candidate: Option<String>,
        reply: oneshot::Sender<Result<(), GameError>>,
    },
    Leave {
        seat: usize,
        conn: u64,
    },
    Summary {
        reply: oneshot::Sender<SessionSummary>,
    },
}

/// Cloneable address of a running session.
#[derive(Debug, Clone)]
pub struct SessionHandle {
    id: String,
    tx: mpsc::UnboundedSender<Command>,
}

impl std::fmt::Debug for Command {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Command")
    }
}

impl SessionHandle {
    pub fn id(&self) -> &str {
        &self.id
    }

    async fn request<T>(
        &self,
        make: impl FnOnce(oneshot::Sender<T>) -> Command,
    ) -> Result<T, GameError> {
        let (reply, rx) = oneshot::channel();
        self.tx
            .send(make(reply))
            .map_err(|_| GameError::NotFound(self.id.clone()))?;
        rx.await.map_err(|_| GameError::NotFound(self.id.clone()))
    }

    pub async fn summary(&self) -> Result<SessionSummary, GameError> {
        self.request(|reply| Command::Summary { reply }).await
    }
}

struct Connection {
    id: u64,
    outbound: mpsc::UnboundedSender<ServerMessage>,
}

struct Actor {
    session: GameSession,
    store: Arc<dyn EventStore>,
    players: Arc<PlayerRegistry>,
    written: usize,
    tokens: HashMap<usize, String>,
    conns: HashMap<usize, Connection>,
    deadline: Option<Instant>,
}

impl Actor {
    fn persist(&mut self) {
        match persist_new(
            &*self.store,
            self.session.id(),
            self.session.log(),
            self.written,
        ) {
            Ok(n) => self.written = n,
            Err(e) => tracing::error!(session = self.session.id(), "cannot persist events: {e}"),
        }
    }

    fn send(&self, seat: usize, msg: ServerMessage) {
        if let Some(conn) = self.conns.get(&seat) {
            let _ = conn.outbound.send(msg);
        }
    }

    fn cards(&self) -> Vec<String> {
        self.session.candidates().names().to_vec()
    }

    fn name(&self, c: cud_core::Candidate) -> String {
        self.session.candidates().name(c).to_string()
    }

    fn lobby_state(&self) -> ServerMessage {
        ServerMessage::LobbyState {
            session: self.session.id().to_string(),
            players: self
                .session
                .seats()
                .iter()
                .map(|s| s.name.clone())
                .collect(),
            seats: self.session.config().seats,
            needed: self.session.config().humans_needed(),
        }
    }

    fn game_start(&self, seat: usize) -> ServerMessage {
        let pref = &self.session.preferences()[seat];
        let m = self.session.candidates().len();
        ServerMessage::GameStart {
            seat,
            cards: self.cards(),
            preferences: pref.order().iter().map(|&c| self.name(c)).collect(),
            values: crate::value_ladder(m),
            tau: self.session.config().tau,
        }
    }

    fn round_state(&self, seat: usize, t: u32) -> ServerMessage {
        let seconds_left = self
            .deadline
            .map(|d| {
                d.saturating_duration_since(Instant::now())
                    .as_secs_f64()
                    .ceil() as u64
            })
            .unwrap_or(0);
        ServerMessage::RoundState {
            t,
            tallies: self.session.scores().as_slice().to_vec(),
            your_ballot: self.name(self.session.ballots().get(seat)),
            seconds_left,
        }
    }

    fn game_over(&self, seat: usize, outcome: Outcome) -> ServerMessage {
        ServerMessage::GameOver {
            winner: outcome.winner().map(|w| self.name(w)),
            points: self.session.points(seat, outcome),
        }
    }

    /// Messages that bring a (re)connected player up to date.
    fn catch_up(&self, seat: usize) -> Vec<ServerMessage> {
        match self.session.phase() {
            Phase::Lobby => vec![self.lobby_state()],
            Phase::Round { t } => vec![self.game_start(seat), self.round_state(seat, t)],
            Phase::Finished { outcome } => {
                vec![self.game_start(seat), self.game_over(seat, outcome)]
            }
        }
    }

    fn humans(&self) -> Vec<usize> {
        self.session.humans().collect()
    }

    fn join(
        &mut self,
        name: String,
        token: String,
        conn: u64,
        outbound: mpsc::UnboundedSender<ServerMessage>,
    ) -> Result<usize, GameError> {
        if let Some(seat) = self.session.seat_of(&name) {
            if self.tokens.get(&seat) != Some(&token) {
                return Err(GameError::DuplicateIdentity(name));
            }
            self.conns.insert(seat, Connection { id: conn, outbound });
            for msg in self.catch_up(seat) {
                self.send(seat, msg);
            }
            return Ok(seat);
        }
        self.players.check(&name)?;
        let seat = self.session.join(&name)?;
        self.persist();
        self.tokens.insert(seat, token);
        self.conns.insert(seat, Connection { id: conn, outbound });
        let lobby = self.lobby_state();
        for i in self.humans() {
            self.send(i, lobby.clone());
        }
        if self.session.ready() {
            self.start()?;
        }
        Ok(seat)
    }

    fn start(&mut self) -> Result<(), GameError> {
        self.session.start()?;
        self.persist();
        let names: Vec<String> = self
            .humans()
            .into_iter()
            .map(|i| self.session.seats()[i].name.clone())
            .collect();
        self.players.count(names);
        for i in self.humans() {
            self.send(i, self.game_start(i));
        }
        self.after_round_change()
    }

    /// Opens the clock of a new round, or announces the end. Rounds that
    /// need no human answer close at once.
    fn after_round_change(&mut self) -> Result<(), GameError> {
        match self.session.phase() {
            Phase::Finished { outcome } => {
                self.deadline = None;
                for i in self.humans() {
                    self.send(i, self.game_over(i, outcome));
                }
                Ok(())
            }
            Phase::Round { t } => {
                if self.session.all_humans_acted() {
                    return self.close_round();
                }
                let secs = self.session.config().round_seconds;
                self.deadline = Some(Instant::now() + Duration::from_secs(secs));
                for i in self.humans() {
                    self.send(i, self.round_state(i, t));
                }
                Ok(())
            }
            Phase::Lobby => Ok(()),
        }
    }

    fn close_round(&mut self) -> Result<(), GameError> {
        let t = self.session.remaining().ok_or(GameError::Finished)?;
        let picked = self.session.close_round()?;
        self.persist();
        for i in self.humans() {
            let msg = ServerMessage::RoundResult {
                t,
                picked_change: picked.map(|m| PickedChange {
                    from: self.name(m.from),
                    to: self.name(m.to),
                    yours: m.seat == i,
                }),
                tallies: self.session.scores().as_slice().to_vec(),
            };
            self.send(i, msg);
        }
        self.after_round_change()
    }

    fn act(&mut self, seat: usize, round: u32, candidate: Option<String>) -> Result<(), GameError> {
        let action = match candidate {
            None => PlayerAction::Keep,
            Some(name) => PlayerAction::ChangeTo(self.session.candidates().lookup(&name)?),
        };
        self.session.act(seat, round, action)?;
        self.persist();
        if self.session.all_humans_acted() {
            self.close_round()?;
        }
        Ok(())
    }

    fn handle(&mut self, cmd: Command) {
        match cmd {
            Command::Join {
                name,
                token,
                conn,
                outbound,
                reply,
            } => {
                let _ = reply.send(self.join(name, token, conn, outbound));
            }
            Command::Act {
                seat,
                round,
                candidate,
                reply,
            } => {
                let _ = reply.send(self.act(seat, round, candidate));
            }
            Command::Leave { seat, conn } => {
                if self.conns.get(&seat).is_some_and(|c| c.id == conn) {
                    self.conns.remove(&seat);
                }
            }
            Command::Summary { reply } => {
                let _ = reply.send(SessionSummary::of(&self.session));
            }
        }
    }

    async fn run(mut self, mut rx: mpsc::UnboundedReceiver<Command>) {
        self.persist();
        if self.session.ready() {
            if let Err(e) = self.start() {
                tracing::error!(session = self.session.id(), "cannot start: {e}");
            }
        }
        loop {
            let deadline = self.deadline;
            tokio::select! {
                cmd = rx.recv() => match cmd {
                    Some(cmd) => self.handle(cmd),
                    None => break,
                },
                _ = tokio::time::sleep_until(deadline.unwrap_or_else(Instant::now)), if deadline.is_some() => {
                    self.deadline = None;
                    if let Err(e) = self.close_round() {
                        tracing::error!(session = self.session.id(), "cannot close round: {e}");
                    }
                }
            }
        }
    }
}

/// Shared server state.
pub struct AppState {
    config: ServerConfig,
    store: Arc<dyn EventStore>,
    sessions: RwLock<BTreeMap<String, SessionHandle>>,
    players: Arc<PlayerRegistry>,
    created: AtomicU64,
    connections: AtomicU64,
}

impl AppState {
    pub fn new(config: ServerConfig, store: Arc<dyn EventStore>) -> Arc<Self> {
        let players = Arc::new(PlayerRegistry {
            limit: config.max_games_per_player,
            games: Mutex::default(),
        });
        Arc::new(AppState {
            config,
            store,
            sessions: RwLock::default(),
            players,
            created: AtomicU64::new(0),
            connections: AtomicU64::new(0),
        })
    }

    pub fn config(&self) -> &ServerConfig {
        &self.config
    }

    pub fn store(&self) -> &Arc<dyn EventStore> {
        &self.store
    }

    pub fn handle(&self, id: &str) -> Option<SessionHandle> {
        self.sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
    }

    fn next_seed(&self, explicit: Option<u64>) -> u64 {
        let k = self.created.fetch_add(1, Ordering::Relaxed);
        explicit.unwrap_or_else(|| match self.config.seed {
            Some(master) => derive_seed(master, &[b"session", &k.to_le_bytes()]),
            None => rand::random(),
        })
    }

    /// Creates a session and starts its actor. Must run inside a tokio runtime.
    pub fn create_session(&self, overrides: &SessionOverrides) -> Result<SessionHandle, GameError> {
        let config = overrides.apply(&self.config.session);
        config.validate()?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let seed = self.next_seed(overrides.seed);
        let session = GameSession::new(id.clone(), config, seed)?;
        let (tx, rx) = mpsc::unbounded_channel();
        let actor = Actor {
            session,
            store: Arc::clone(&self.store),
            players: Arc::clone(&self.players),
            written: 0,
            tokens: HashMap::new(),
            conns: HashMap::new(),
            deadline: None,
        };
        tokio::spawn(actor.run(rx));
        let handle = SessionHandle { id: id.clone(), tx };
        self.sessions
            .write()
            .expect("session map poisoned")
            .insert(id, handle.clone());
        Ok(handle)
    }

    /// Live summary, or one rebuilt from the stored log.
    pub async fn summary(&self, id: &str) -> Result<SessionSummary, GameError> {
        match self.handle(id) {
            Some(h) => h.summary().await,
            None => {
                let log = self.store.load(id)?;
                Ok(SessionSummary::of(&GameSession::replay(&log)?))
            }
        }
    }
}

pub struct ApiError(pub GameError);

impl From<GameError> for ApiError {
    fn from(e: GameError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            GameError::NotFound(_) => StatusCode::NOT_FOUND,
            GameError::Config(_)
            | GameError::Json(_)
            | GameError::Toml(_)
            | GameError::Model(_) => StatusCode::BAD_REQUEST,
            GameError::Corrupt { .. }
            | GameError::OutOfOrder { .. }
            | GameError::Truncated
            | GameError::EmptyLog => StatusCode::UNPROCESSABLE_ENTITY,
            GameError::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::CONFLICT,
        };
        let body = Json(serde_json::json!({ "error": self.0.to_string() }));
        (status, body).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

async fn health(State(state): State<Arc<AppState>>) -> Json<serde_json::Value> {
    let sessions = state.sessions.read().expect("session map poisoned").len();
    Json(serde_json::json!({ "status": "ok", "sessions": sessions }))
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<serde_json::Value>)> {
    let overrides: SessionOverrides = if body.iter().all(u8::is_ascii_whitespace) {
        SessionOverrides::default()
    } else {
        serde_json::from_slice(&body).map_err(GameError::from)?
    };
    let handle = state.create_session(&overrides)?;
    Ok((
        StatusCode::CREATED,
        Json(serde_json::json!({ "id": handle.id() })),
    ))
}

async fn list_sessions(State(state): State<Arc<AppState>>) -> ApiResult<Json<Vec<SessionSummary>>> {
    let mut ids = state.store.sessions()?;
    let live: Vec<String> = state
        .sessions
        .read()
        .expect("session map poisoned")
        .keys()
        .cloned()
        .collect();
    for id in live {
        if !ids.contains(&id) {
            ids.push(id);
        }
    }
    let mut out = Vec::with_capacity(ids.len());
    for id in ids {
        match state.summary(&id).await {
            Ok(s) => out.push(s),
            Err(e) => tracing::warn!(session = id, "skipping unreadable session: {e}"),
        }
    }
    Ok(Json(out))
}

async fn session_metrics(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> ApiResult<Json<GameMetrics>> {
    let summary = state.summary(&id).await?;
    match summary.metrics {
        Some(m) => Ok(Json(m)),
        None => Err(ApiError(match summary.phase {
            Phase::Lobby => GameError::NotStarted,
            _ => GameError::Truncated,
        })),
    }
}

async fn session_log(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> ApiResult<Response> {
    let text = state.store.raw(&id)?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], text).into_response())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub id: String,
    pub records: usize,
    pub finished: bool,
    pub metrics: GameMetrics,
}

async fn session_replay(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> ApiResult<Json<ReplayReport>> {
    let log = state.store.load(&id)?;
    let metrics = GameSession::replay_metrics(&log)?;
    Ok(Json(ReplayReport {
        id,
        records: log.len(),
        finished: true,
        metrics,
    }))
}

async fn session_ws(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    ws: WebSocketUpgrade,
) -> ApiResult<Response> {
    let handle = state
        .handle(&id)
        .ok_or_else(|| GameError::NotFound(id.clone()))?;
    let conn = state.connections.fetch_add(1, Ordering::Relaxed);
    Ok(ws.on_upgrade(move |socket| play(socket, handle, conn)))
}

/// One player's connection: `join` first, then round answers.
async fn play(socket: WebSocket, handle: SessionHandle, conn: u64) {
    let (mut sink, mut stream) = socket.split();
    let (out, mut out_rx) = mpsc::unbounded_channel::<ServerMessage>();
    let writer = tokio::spawn(async move {
        while let Some(msg) = out_rx.recv().await {
            let text = serde_json::to_string(&msg).expect("server messages serialize");
            if sink.send(Message::Text(text.into())).await.is_err() {
                break;
            }
        }
    });
    let error = |out: &mpsc::UnboundedSender<ServerMessage>, e: String| {
        let _ = out.send(ServerMessage::Error { message: e });
    };
    let mut seat = None;
    while let Some(Ok(frame)) = stream.next().await {
        let text = match frame {
            Message::Text(t) => t,
            Message::Close(_) => break,
            _ => continue,
        };
        let msg: ClientMessage = match serde_json::from_str(text.as_str()) {
            Ok(m) => m,
            Err(e) => {
                error(&out, format!("bad message: {e}"));
                continue;
            }
        };
        let result = match (msg, seat) {
            (ClientMessage::Join { name, token }, None) => {
                let outbound = out.clone();
                handle
                    .request(|reply| Command::Join {
                        name,
                        token,
                        conn,
                        outbound,
                        reply,
                    })
                    .await
                    .and_then(|r| r)
                    .map(|s| seat = Some(s))
            }
            (ClientMessage::Join { .. }, Some(_)) => Err(GameError::DuplicateIdentity(
                "this connection already joined".into(),
            )),
            (_, None) => Err(GameError::NotStarted),
            (ClientMessage::ApplyChange { round, candidate }, Some(s)) => handle
                .request(|reply| Command::Act {
                    seat: s,
                    round,
                    candidate: Some(candidate),
                    reply,
                })
                .await
                .and_then(|r| r),
            (ClientMessage::Keep { round }, Some(s)) => handle
                .request(|reply| Command::Act {
                    seat: s,
                    round,
                    candidate: None,
                    reply,
                })
                .await
                .and_then(|r| r),
        };
        if let Err(e) = result {
            error(&out, e.to_string());
        }
    }
    if let Some(seat) = seat {
        let _ = handle.tx.send(Command::Leave { seat, conn });
    }
    drop(out);
    let _ = writer.await;
}

pub fn router(state: Arc<AppState>) -> Router {
    let static_dir = state.config.static_dir.clone();
    let router = Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}/metrics", get(session_metrics))
        .route("/sessions/{id}/log", get(session_log))
        .route("/sessions/{id}/replay", get(session_replay))
        .route("/sessions/{id}/ws", get(session_ws))
        .with_state(state);
    match static_dir {
        Some(dir) => router.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => router,
    }
}

/// Binds the configured address and serves until the process stops.
pub async fn serve(state: Arc<AppState>) -> Result<(), GameError> {
    let addr = state.config.listen;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| GameError::io(format!("listen {addr}"), e))?;
    tracing::info!(
        "listening on {}",
        listener
            .local_addr()
            .map_err(|e| GameError::io("listen", e))?
    );
    axum::serve(listener, router(state))
        .await
        .map_err(|e| GameError::io("serve", e))
}
