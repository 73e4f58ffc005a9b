use std::fs;
use std::io::Write;

use cud_game::{
    persist_new, run_bot_game, EventStore, FileStore, GameError, GameSession, MemoryStore,
    SessionConfig,
};

fn stores(dir: &std::path::Path) -> Vec<Box<dyn EventStore>> {
    vec![
        Box::new(FileStore::open(dir).unwrap()),
        Box::new(MemoryStore::new()),
    ]
}

#[test]
fn persisted_games_replay_to_the_same_metrics() {
    let dir = tempfile::tempdir().unwrap();
    for store in stores(dir.path()) {
        let mut ids = Vec::new();
        for seed in 0..20 {
            let id = format!("game-{seed}");
            let s = run_bot_game(id.clone(), SessionConfig::bot_only(8, 10), seed).unwrap();
            // Write in two batches, as a live server would.
            let half = s.log().len() / 2;
            let written = persist_new(&*store, &id, &s.log()[..half], 0).unwrap();
            assert_eq!(
                persist_new(&*store, &id, s.log(), written).unwrap(),
                s.log().len()
            );

            let back = store.load(&id).unwrap();
            assert_eq!(back, s.log());
            assert_eq!(
                GameSession::replay_metrics(&back).unwrap(),
                *s.metrics().unwrap()
            );
            assert_eq!(store.raw(&id).unwrap().lines().count(), s.log().len());
            ids.push(id);
        }
        assert_eq!(store.sessions().unwrap(), ids);
        assert!(matches!(store.load("nope"), Err(GameError::NotFound(_))));
    }
}

#[test]
fn file_layout_and_damage() {
    let dir = tempfile::tempdir().unwrap();
    let store = FileStore::open(dir.path()).unwrap();
    let s = run_bot_game("g1", SessionConfig::bot_only(5, 2), 4).unwrap();
    persist_new(&store, "g1", s.log(), 0).unwrap();
    let path = store.session_path("g1");
    assert!(path.starts_with(dir.path().join("sessions")));
    let index = fs::read_to_string(dir.path().join("index.jsonl")).unwrap();
    assert_eq!(index.trim(), r#"{"session":"g1"}"#);

    assert!(matches!(store.load("../g1"), Err(GameError::NotFound(_))));

    // A half-written final line.
    let text = fs::read_to_string(&path).unwrap();
    let cut = text.trim_end().rfind('\n').unwrap() + 10;
    fs::write(&path, &text[..cut]).unwrap();
    assert!(matches!(store.load("g1"), Err(GameError::Corrupt { .. })));

    // The complete lines alone stop short of the result.
    let whole = &text[..text.trim_end().rfind('\n').unwrap() + 1];
    fs::write(&path, whole).unwrap();
    let records = store.load("g1").unwrap();
    assert!(matches!(
        GameSession::replay_metrics(&records),
        Err(GameError::Truncated)
    ));

    let mut f = fs::OpenOptions::new().append(true).open(&path).unwrap();
    writeln!(f, "not json").unwrap();
    assert!(matches!(store.load("g1"), Err(GameError::Corrupt { .. })));
}
