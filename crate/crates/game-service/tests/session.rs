use cud_core::{Candidate, Outcome, ScoreVector};
use cud_game::{
    run_bot_game, value_ladder, Event, FillMode, GameError, GameSession, Irrationality, Phase,
    PlayerAction, PreferencePool, SeatKind, SessionConfig,
};
use proptest::prelude::*;

fn orders(rows: &[&[&str]]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| r.iter().map(|s| s.to_string()).collect())
        .collect()
}

/// Three humans with fixed rankings over cards a, b, c.
fn three_humans(tau: u32) -> GameSession {
    let config = SessionConfig {
        seats: 3,
        tau,
        fill: FillMode::HumanOnly,
        cards: orders(&[&["a", "b", "c"]]).remove(0),
        pool: PreferencePool::Fixed(orders(&[
            &["a", "b", "c"],
            &["a", "c", "b"],
            &["b", "a", "c"],
        ])),
        ..SessionConfig::default()
    };
    let mut s = GameSession::new("trio", config, 1).unwrap();
    for name in ["ann", "bob", "cyd"] {
        s.join(name).unwrap();
    }
    assert!(s.ready());
    s.start().unwrap();
    s
}

#[test]
fn single_applicant_reaches_consensus() {
    let mut s = three_humans(4);
    assert_eq!(s.phase(), Phase::Round { t: 4 });
    assert_eq!(s.scores(), &ScoreVector::new(vec![2, 1, 0]));
    s.act(0, 4, PlayerAction::Keep).unwrap();
    s.act(1, 4, PlayerAction::Keep).unwrap();
    let flags = s.act(2, 4, PlayerAction::ChangeTo(Candidate(0))).unwrap();
    assert!(flags.is_empty());
    assert!(s.all_humans_acted());
    let picked = s.close_round().unwrap().unwrap();
    assert_eq!(
        (picked.seat, picked.from, picked.to),
        (2, Candidate(1), Candidate(0))
    );
    assert_eq!(
        s.phase(),
        Phase::Finished {
            outcome: Outcome::Winner(Candidate(0))
        }
    );
    assert_eq!(s.rewards(), &[100, 100, 67]);
    let m = s.metrics().unwrap();
    assert!(m.converged);
    assert_eq!(m.winner, Some(Candidate(0)));
    assert_eq!(m.rounds_used, 1);
    assert_eq!(m.vote_changes, 1);
    assert_eq!(m.por, Some(0));
    assert_eq!(m.human_actions, 3);
    assert!((m.avg_reward_points - 89.0).abs() < 1e-9);
}

#[test]
fn irrational_changes_are_flagged() {
    let mut s = three_humans(2);
    // Seat 2 likes b > a > c; moving to c while a leads and b outpolls c.
    let flags = s.act(2, 2, PlayerAction::ChangeTo(Candidate(2))).unwrap();
    let classes: Vec<_> = flags.iter().map(|f| f.class).collect();
    assert_eq!(
        classes,
        vec![
            Irrationality::OpposingAlignment,
            Irrationality::InappropriateAlignment
        ]
    );
    assert_eq!(flags[0].evidence, Candidate(0));
    assert_eq!(flags[1].evidence, Candidate(1));
    s.act(1, 2, PlayerAction::Keep).unwrap();
    s.act(0, 2, PlayerAction::ChangeTo(Candidate(0))).unwrap();
    // A "change" to the current ballot is not an application.
    s.close_round().unwrap().unwrap();
    s.run_to_end().unwrap();
    let m = s.metrics().unwrap();
    assert_eq!(m.irrational.oa, 1);
    assert_eq!(m.irrational.ia, 1);
    assert_eq!(m.irrational.flagged_actions, 1);
    assert_eq!(m.human_actions, 3);
}

#[test]
fn deadline_without_consensus_pays_nothing() {
    let mut s = three_humans(2);
    s.run_to_end().unwrap();
    assert_eq!(
        s.phase(),
        Phase::Finished {
            outcome: Outcome::Default
        }
    );
    assert_eq!(s.rounds_used(), 2);
    assert_eq!(s.rewards(), &[0, 0, 0]);
    let m = s.metrics().unwrap();
    assert!(!m.converged);
    assert_eq!(m.por, None);
    assert_eq!(m.avg_reward_points, 0.0);
}

#[test]
fn action_errors() {
    let mut s = three_humans(3);
    assert!(matches!(
        s.act(0, 2, PlayerAction::Keep),
        Err(GameError::WrongRound { got: 2, current: 3 })
    ));
    assert!(matches!(
        s.act(7, 3, PlayerAction::Keep),
        Err(GameError::NoSeat(7))
    ));
    assert!(matches!(
        s.act(0, 3, PlayerAction::ChangeTo(Candidate(3))),
        Err(GameError::Model(_))
    ));
    s.act(0, 3, PlayerAction::Keep).unwrap();
    assert!(matches!(
        s.act(0, 3, PlayerAction::Keep),
        Err(GameError::AlreadyActed(0))
    ));
    assert!(matches!(s.join("dan"), Err(GameError::AlreadyStarted)));
    assert!(matches!(s.start(), Err(GameError::AlreadyStarted)));
    s.run_to_end().unwrap();
    assert!(matches!(
        s.act(1, 0, PlayerAction::Keep),
        Err(GameError::Finished)
    ));
    assert!(matches!(s.close_round(), Err(GameError::Finished)));
}

#[test]
fn lobby_rules() {
    let config = SessionConfig {
        seats: 4,
        start_humans: Some(2),
        ..SessionConfig::default()
    };
    let mut s = GameSession::new("lobby", config, 5).unwrap();
    assert!(matches!(
        s.act(0, 1, PlayerAction::Keep),
        Err(GameError::NotStarted)
    ));
    assert!(matches!(s.start(), Err(GameError::NotStarted)));
    s.join("ann").unwrap();
    assert!(matches!(
        s.join("ann"),
        Err(GameError::DuplicateIdentity(_))
    ));
    assert!(!s.ready());
    s.join("bob").unwrap();
    assert!(s.ready());
    s.join("cyd").unwrap();
    s.join("dan").unwrap();
    assert!(matches!(s.join("eve"), Err(GameError::SessionFull)));

    let mut bots = GameSession::new("bots", SessionConfig::bot_only(8, 10), 5).unwrap();
    assert!(matches!(bots.join("ann"), Err(GameError::SessionFull)));
}

#[test]
fn mixed_games_fill_with_bots() {
    let config = SessionConfig {
        seats: 8,
        round_seconds: 1,
        ..SessionConfig::default()
    };
    assert_eq!(config.humans_needed(), 6);
    let mut s = GameSession::new("mixed", config, 9).unwrap();
    for i in 0..6 {
        s.join(&format!("p{i}")).unwrap();
    }
    s.start().unwrap();
    let kinds: Vec<_> = s.seats().iter().map(|seat| seat.kind).collect();
    assert_eq!(&kinds[..6], &[SeatKind::Human; 6]);
    assert_eq!(&kinds[6..], &[SeatKind::Bot; 2]);
    assert_eq!(s.seats()[6].name, "bot-7");
    for (i, p) in s.preferences().iter().enumerate() {
        assert_eq!(s.ballots().get(i), p.top());
    }
    if let Some(t) = s.remaining() {
        assert!(matches!(
            s.act(6, t, PlayerAction::Keep),
            Err(GameError::NotHuman(6))
        ));
    }
    s.run_to_end().unwrap();
    let replayed = GameSession::replay(s.log()).unwrap();
    assert_eq!(replayed.metrics(), s.metrics());
    assert_eq!(replayed.ballots(), s.ballots());
}

#[test]
fn unanimous_deal_finishes_at_once() {
    let config = SessionConfig {
        seats: 3,
        fill: FillMode::BotOnly,
        cards: orders(&[&["a", "b"]]).remove(0),
        pool: PreferencePool::Orders(orders(&[&["b", "a"]])),
        ..SessionConfig::default()
    };
    let s = run_bot_game("same", config, 0).unwrap();
    assert_eq!(s.rounds_used(), 0);
    assert_eq!(s.metrics().unwrap().winner, Some(Candidate(1)));
    assert_eq!(s.rewards(), &[100, 100, 100]);
}

#[test]
fn reward_ladder_for_five_cards() {
    let s = run_bot_game("ladder", SessionConfig::bot_only(8, 10), 3).unwrap();
    let outcome = match s.phase() {
        Phase::Finished { outcome } => outcome,
        p => panic!("not finished: {p:?}"),
    };
    let w = outcome.winner().expect("τ ≥ n always converges");
    assert_eq!(value_ladder(5), vec![100, 80, 60, 40, 20]);
    for (i, p) in s.preferences().iter().enumerate() {
        assert_eq!(s.rewards()[i], value_ladder(5)[p.rank(w)]);
    }
    assert_eq!(s.points(0, Outcome::Default), 0);
}

#[test]
fn replay_rejects_damaged_logs() {
    let s = run_bot_game("dmg", SessionConfig::bot_only(6, 3), 11).unwrap();
    let log = s.log().to_vec();
    assert!(log.len() >= 4);

    assert!(matches!(GameSession::replay(&[]), Err(GameError::EmptyLog)));
    assert!(matches!(
        GameSession::replay_metrics(&log[..log.len() - 1]),
        Err(GameError::Truncated)
    ));

    let mut swapped = log.clone();
    swapped.swap(1, 2);
    assert!(matches!(
        GameSession::replay(&swapped),
        Err(GameError::OutOfOrder { expected: 1, .. })
    ));

    let mut no_created = log.clone();
    no_created.remove(0);
    assert!(matches!(
        GameSession::replay(&no_created),
        Err(GameError::Corrupt { .. })
    ));

    // Altered deal: preferences no longer match the seeded draw.
    let mut dealt = log.clone();
    for r in &mut dealt {
        if let Event::Started { preferences, .. } = &mut r.event {
            preferences.swap(0, 1);
            if preferences[0] == preferences[1] {
                preferences[0] = cud_core::Preference::from_indices(&[4, 3, 2, 1, 0]).unwrap();
            }
        }
    }
    assert!(matches!(
        GameSession::replay(&dealt),
        Err(GameError::Corrupt { seq: 1, .. })
    ));

    // Altered result metrics.
    let mut result = log.clone();
    if let Event::Finished { rewards, .. } = &mut result.last_mut().unwrap().event {
        rewards[0] += 1;
    }
    assert!(matches!(
        GameSession::replay(&result),
        Err(GameError::Corrupt { .. })
    ));
}

#[test]
fn bot_only_sessions_converge_and_replay() {
    for seed in 0..200 {
        let s = run_bot_game(format!("s{seed}"), SessionConfig::bot_only(8, 10), seed).unwrap();
        let m = s.metrics().unwrap();
        assert!(m.converged, "seed {seed}");
        assert_eq!(m.irrational.flagged_actions, 0);
        let json: Vec<String> = s
            .log()
            .iter()
            .map(|r| serde_json::to_string(r).unwrap())
            .collect();
        let back: Vec<_> = json
            .iter()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(&GameSession::replay_metrics(&back).unwrap(), m);
    }
}

fn profile_strategy() -> impl Strategy<Value = (usize, usize, u32, Vec<Vec<usize>>)> {
    (2usize..=8, 2usize..=5, 1u32..=9).prop_flat_map(|(n, m, tau)| {
        let order = Just((0..m).collect::<Vec<_>>()).prop_shuffle();
        (
            Just(n),
            Just(m),
            Just(tau),
            proptest::collection::vec(order, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bots_converge_exactly_when_some_card_is_close_enough(
        (n, m, tau, prefs) in profile_strategy(),
        seed in any::<u64>(),
    ) {
        let cards: Vec<String> = (0..m).map(|c| format!("c{c}")).collect();
        let fixed = prefs
            .iter()
            .map(|o| o.iter().map(|&c| cards[c].clone()).collect())
            .collect();
        let config = SessionConfig {
            seats: n,
            tau,
            fill: FillMode::BotOnly,
            cards,
            pool: PreferencePool::Fixed(fixed),
            ..SessionConfig::default()
        };
        let s = run_bot_game("p", config, seed).unwrap();
        let mut top = vec![0u32; m];
        for o in &prefs {
            top[o[0]] += 1;
        }
        let best = *top.iter().max().unwrap();
        let m_ = s.metrics().unwrap();
        prop_assert_eq!(m_.converged, best + tau >= n as u32);
        prop_assert!(m_.rounds_used <= tau);
        prop_assert_eq!(m_.vote_changes as usize, s.moves().len());
        if let Some(w) = m_.winner {
            prop_assert!(s.ballots().as_slice().iter().all(|&b| b == w));
        }
    }

    #[test]
    fn humans_following_bot_advice_are_never_flagged(seed in any::<u64>(), tau in 1u32..=10) {
        // Humans who only keep or join a strict improvement chosen by the
        // lazy rule earn no flags.
        let config = SessionConfig {
            seats: 6,
            tau,
            fill: FillMode::HumanOnly,
            ..SessionConfig::default()
        };
        let mut s = GameSession::new("h", config, seed).unwrap();
        for i in 0..6 {
            s.join(&format!("p{i}")).unwrap();
        }
        s.start().unwrap();
        while let Some(t) = s.remaining() {
            let rule = s.rule().unwrap();
            for seat in 0..6 {
                let from = s.ballots().get(seat);
                let to = cud_core::best_response(
                    cud_core::AgentKind::Lazy,
                    &s.preferences()[seat],
                    from,
                    s.scores(),
                    t,
                    &rule,
                );
                let action = if to == from { PlayerAction::Keep } else { PlayerAction::ChangeTo(to) };
                let flags = s.act(seat, t, action).unwrap();
                prop_assert!(flags.is_empty(), "seat {} {:?}->{:?} at {:?}", seat, from, to, s.scores());
            }
            s.close_round().unwrap();
        }
        prop_assert_eq!(s.metrics().unwrap().irrational.flagged_actions, 0);
    }
}
