use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use cud_game::server::{router, AppState, SessionOverrides, SessionSummary};
use cud_game::wire::{ClientMessage, ServerMessage};
use cud_game::{
    FileStore, FillMode, GameMetrics, MemoryStore, Phase, PreferencePool, ServerConfig,
};
use futures_util::{SinkExt, StreamExt};
use http_body_util::BodyExt;
use tokio_tungstenite::tungstenite::Message;
use tower::ServiceExt;

fn state() -> Arc<AppState> {
    let config = ServerConfig {
        seed: Some(7),
        ..ServerConfig::default()
    };
    AppState::new(config, Arc::new(MemoryStore::new()))
}

async fn call(app: &axum::Router, method: &str, uri: &str, body: &str) -> (StatusCode, String) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn finished_metrics(app: &axum::Router, id: &str) -> GameMetrics {
    for _ in 0..200 {
        let (status, body) = call(app, "GET", &format!("/sessions/{id}/metrics"), "").await;
        if status == StatusCode::OK {
            return serde_json::from_str(&body).unwrap();
        }
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    panic!("session {id} never finished");
}

#[tokio::test]
async fn admin_routes() {
    let app = router(state());
    let (status, body) = call(&app, "GET", "/health", "").await;
    assert_eq!(status, StatusCode::OK);
    assert!(body.contains("\"ok\""));

    let (status, body) = call(&app, "POST", "/sessions", r#"{"fill":"bot_only","tau":12}"#).await;
    assert_eq!(status, StatusCode::CREATED);
    let id = serde_json::from_str::<serde_json::Value>(&body).unwrap()["id"]
        .as_str()
        .unwrap()
        .to_string();
    let metrics = finished_metrics(&app, &id).await;
    assert!(metrics.converged);

    let (status, log) = call(&app, "GET", &format!("/sessions/{id}/log"), "").await;
    assert_eq!(status, StatusCode::OK);
    let first: serde_json::Value = serde_json::from_str(log.lines().next().unwrap()).unwrap();
    assert_eq!(first["event"], "created");
    assert_eq!(first["seq"], 0);
    let last: serde_json::Value = serde_json::from_str(log.lines().last().unwrap()).unwrap();
    assert_eq!(last["event"], "finished");

    let (status, body) = call(&app, "GET", &format!("/sessions/{id}/replay"), "").await;
    assert_eq!(status, StatusCode::OK);
    let report: serde_json::Value = serde_json::from_str(&body).unwrap();
    let replayed: GameMetrics = serde_json::from_value(report["metrics"].clone()).unwrap();
    assert_eq!(replayed, metrics);
    assert_eq!(
        report["records"].as_u64().unwrap() as usize,
        log.lines().count()
    );

    // A lobby waiting for players.
    let (status, body) = call(&app, "POST", "/sessions", "").await;
    assert_eq!(status, StatusCode::CREATED);
    let lobby = serde_json::from_str::<serde_json::Value>(&body).unwrap()["id"]
        .as_str()
        .unwrap()
        .to_string();
    let (status, _) = call(&app, "GET", &format!("/sessions/{lobby}/metrics"), "").await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = call(&app, "GET", &format!("/sessions/{lobby}/replay"), "").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let (status, body) = call(&app, "GET", "/sessions", "").await;
    assert_eq!(status, StatusCode::OK);
    let list: Vec<SessionSummary> = serde_json::from_str(&body).unwrap();
    assert_eq!(list.len(), 2);
    assert!(matches!(list[0].phase, Phase::Finished { .. }));
    assert_eq!(list[1].phase, Phase::Lobby);

    let (status, _) = call(&app, "GET", "/sessions/missing/metrics", "").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "POST", "/sessions", r#"{"seats":0}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "POST", "/sessions", r#"{"colour":"red"}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn stored_sessions_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let config = ServerConfig {
        seed: Some(1),
        ..ServerConfig::default()
    };
    let first = AppState::new(
        config.clone(),
        Arc::new(FileStore::open(dir.path()).unwrap()),
    );
    let app = router(first);
    let (_, body) = call(&app, "POST", "/sessions", r#"{"fill":"bot_only"}"#).await;
    let id = serde_json::from_str::<serde_json::Value>(&body).unwrap()["id"]
        .as_str()
        .unwrap()
        .to_string();
    let metrics = finished_metrics(&app, &id).await;

    let second = AppState::new(config, Arc::new(FileStore::open(dir.path()).unwrap()));
    let app = router(second);
    let (status, body) = call(&app, "GET", &format!("/sessions/{id}/metrics"), "").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(serde_json::from_str::<GameMetrics>(&body).unwrap(), metrics);
    let (_, body) = call(&app, "GET", "/sessions", "").await;
    let list: Vec<SessionSummary> = serde_json::from_str(&body).unwrap();
    assert_eq!(list.len(), 1);
    assert_eq!(list[0].id, id);
}

type Socket =
    tokio_tungstenite::WebSocketStream<tokio_tungstenite::MaybeTlsStream<tokio::net::TcpStream>>;

async fn send(ws: &mut Socket, msg: &ClientMessage) {
    let text = serde_json::to_string(msg).unwrap();
    ws.send(Message::Text(text.into())).await.unwrap();
}

async fn recv(ws: &mut Socket) -> ServerMessage {
    loop {
        let frame = tokio::time::timeout(Duration::from_secs(10), ws.next())
            .await
            .expect("server went quiet")
            .unwrap()
            .unwrap();
        if let Message::Text(t) = frame {
            return serde_json::from_str(t.as_str()).unwrap();
        }
    }
}

async fn spawn_server(state: Arc<AppState>) -> std::net::SocketAddr {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, router(state)).await.unwrap() });
    addr
}

fn cards() -> Vec<String> {
    ["a", "b", "c"].map(String::from).to_vec()
}

#[tokio::test]
async fn two_players_over_websockets() {
    let state = state();
    let addr = spawn_server(Arc::clone(&state)).await;
    // Two humans and one bot; the bot and seat 0 agree on a, seat 1 likes b.
    let orders = vec![
        vec!["a".to_string(), "b".into(), "c".into()],
        vec!["b".to_string(), "a".into(), "c".into()],
        vec!["a".to_string(), "c".into(), "b".into()],
    ];
    let handle = state
        .create_session(&SessionOverrides {
            seats: Some(3),
            tau: Some(3),
            fill: Some(FillMode::Mixed),
            start_humans: Some(2),
            cards: Some(cards()),
            pool: Some(PreferencePool::Fixed(orders)),
            ..SessionOverrides::default()
        })
        .unwrap();
    let url = format!("ws://{addr}/sessions/{}/ws", handle.id());

    let (mut ann, _) = tokio_tungstenite::connect_async(&url).await.unwrap();
    send(&mut ann, &ClientMessage::Keep { round: 3 }).await;
    assert!(matches!(recv(&mut ann).await, ServerMessage::Error { .. }));
    send(
        &mut ann,
        &ClientMessage::Join {
            name: "ann".into(),
            token: "t-ann".into(),
        },
    )
    .await;
    match recv(&mut ann).await {
        ServerMessage::LobbyState {
            players,
            needed,
            seats,
            ..
        } => {
            assert_eq!(players, vec!["ann"]);
            assert_eq!((needed, seats), (2, 3));
        }
        other => panic!("{other:?}"),
    }

    let (mut bob, _) = tokio_tungstenite::connect_async(&url).await.unwrap();
    send(
        &mut bob,
        &ClientMessage::Join {
            name: "ann".into(),
            token: "stolen".into(),
        },
    )
    .await;
    assert!(matches!(recv(&mut bob).await, ServerMessage::Error { .. }));
    send(
        &mut bob,
        &ClientMessage::Join {
            name: "bob".into(),
            token: "t-bob".into(),
        },
    )
    .await;

    for ws in [&mut ann, &mut bob] {
        // Lobby update, then the deal.
        let mut msg = recv(ws).await;
        if matches!(msg, ServerMessage::LobbyState { .. }) {
            msg = recv(ws).await;
        }
        match msg {
            ServerMessage::GameStart {
                cards: c,
                values,
                tau,
                preferences,
                ..
            } => {
                assert_eq!(c, cards());
                assert_eq!(values, vec![100, 67, 33]);
                assert_eq!(tau, 3);
                assert_eq!(preferences.len(), 3);
            }
            other => panic!("{other:?}"),
        }
        match recv(ws).await {
            ServerMessage::RoundState {
                t,
                tallies,
                seconds_left,
                ..
            } => {
                assert_eq!(t, 3);
                assert_eq!(tallies, vec![2, 1, 0]);
                assert!(seconds_left > 0);
            }
            other => panic!("{other:?}"),
        }
    }

    // Wrong round, then a real answer, then a repeat.
    send(&mut ann, &ClientMessage::Keep { round: 2 }).await;
    assert!(matches!(recv(&mut ann).await, ServerMessage::Error { .. }));
    send(&mut ann, &ClientMessage::Keep { round: 3 }).await;
    send(&mut ann, &ClientMessage::Keep { round: 3 }).await;
    assert!(matches!(recv(&mut ann).await, ServerMessage::Error { .. }));

    // Bob gives in; he is the only applicant, so the round closes at once.
    send(
        &mut bob,
        &ClientMessage::ApplyChange {
            round: 3,
            candidate: "a".into(),
        },
    )
    .await;
    for (ws, mine) in [(&mut ann, false), (&mut bob, true)] {
        match recv(ws).await {
            ServerMessage::RoundResult {
                t,
                picked_change,
                tallies,
            } => {
                assert_eq!(t, 3);
                let p = picked_change.unwrap();
                assert_eq!((p.from.as_str(), p.to.as_str(), p.yours), ("b", "a", mine));
                assert_eq!(tallies, vec![3, 0, 0]);
            }
            other => panic!("{other:?}"),
        }
    }
    for (ws, points) in [(&mut ann, 100), (&mut bob, 67)] {
        match recv(ws).await {
            ServerMessage::GameOver { winner, points: p } => {
                assert_eq!(winner.as_deref(), Some("a"));
                assert_eq!(p, points);
            }
            other => panic!("{other:?}"),
        }
    }

    // A reconnect with the right token gets the final state again.
    let (mut again, _) = tokio_tungstenite::connect_async(&url).await.unwrap();
    send(
        &mut again,
        &ClientMessage::Join {
            name: "bob".into(),
            token: "t-bob".into(),
        },
    )
    .await;
    assert!(matches!(
        recv(&mut again).await,
        ServerMessage::GameStart { seat: 1, .. }
    ));
    assert!(matches!(
        recv(&mut again).await,
        ServerMessage::GameOver { points: 67, .. }
    ));

    let summary = handle.summary().await.unwrap();
    let m = summary.metrics.unwrap();
    assert_eq!(m.human_actions, 2);
    assert_eq!(m.vote_changes, 1);
    assert_eq!(summary.players, vec!["ann", "bob"]);
}

#[tokio::test]
async fn silent_rounds_time_out() {
    let state = state();
    let handle = state
        .create_session(&SessionOverrides {
            seats: Some(2),
            tau: Some(2),
            round_seconds: Some(1),
            fill: Some(FillMode::HumanOnly),
            cards: Some(cards()),
            pool: Some(PreferencePool::Fixed(vec![
                vec!["a".into(), "b".into(), "c".into()],
                vec!["b".into(), "a".into(), "c".into()],
            ])),
            ..SessionOverrides::default()
        })
        .unwrap();
    let addr = spawn_server(Arc::clone(&state)).await;
    let url = format!("ws://{addr}/sessions/{}/ws", handle.id());
    let mut sockets = Vec::new();
    for name in ["x", "y"] {
        let (mut ws, _) = tokio_tungstenite::connect_async(&url).await.unwrap();
        send(
            &mut ws,
            &ClientMessage::Join {
                name: name.into(),
                token: name.into(),
            },
        )
        .await;
        sockets.push(ws);
    }
    let ws = &mut sockets[0];
    let mut results = 0;
    loop {
        match recv(ws).await {
            ServerMessage::RoundResult { picked_change, .. } => {
                assert!(picked_change.is_none());
                results += 1;
            }
            ServerMessage::GameOver { winner, points } => {
                assert_eq!((winner, points), (None, 0));
                break;
            }
            _ => {}
        }
    }
    assert_eq!(results, 2);
    let m = handle.summary().await.unwrap().metrics.unwrap();
    assert!(!m.converged);
    assert_eq!(m.rounds_used, 2);
}

#[tokio::test]
async fn game_limit_per_player() {
    let config = ServerConfig {
        max_games_per_player: Some(1),
        ..ServerConfig::default()
    };
    let state = AppState::new(config, Arc::new(MemoryStore::new()));
    let addr = spawn_server(Arc::clone(&state)).await;
    let solo = SessionOverrides {
        seats: Some(2),
        start_humans: Some(1),
        tau: Some(1),
        round_seconds: Some(1),
        ..SessionOverrides::default()
    };
    for expect_ok in [true, false] {
        let h = state.create_session(&solo).unwrap();
        let url = format!("ws://{addr}/sessions/{}/ws", h.id());
        let (mut ws, _) = tokio_tungstenite::connect_async(&url).await.unwrap();
        send(
            &mut ws,
            &ClientMessage::Join {
                name: "zed".into(),
                token: "z".into(),
            },
        )
        .await;
        let first = recv(&mut ws).await;
        if expect_ok {
            assert!(matches!(first, ServerMessage::LobbyState { .. }));
        } else {
            match first {
                ServerMessage::Error { message } => assert!(message.contains("zed")),
                other => panic!("{other:?}"),
            }
        }
    }
}
