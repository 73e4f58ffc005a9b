//! The three worked examples: 3 voters / 3 candidates under unanimity, and the
//! 5-voter lazy vs proactive divergence.

use cud_core::*;

fn example1() -> PreferenceProfile {
    PreferenceProfile::from_names(
        &["a", "b", "c"],
        &[
            vec!["a", "b", "c"],
            vec!["b", "c", "a"],
            vec!["c", "a", "b"],
        ],
    )
    .unwrap()
}

fn example2() -> PreferenceProfile {
    PreferenceProfile::from_names(
        &["a", "b", "c", "d"],
        &[
            vec!["a", "b", "c", "d"],
            vec!["a", "c", "b", "d"],
            vec!["b", "c", "a", "d"],
            vec!["b", "a", "c", "d"],
            vec!["c", "b", "d", "a"],
        ],
    )
    .unwrap()
}

fn set(p: &PreferenceProfile, names: &[&str]) -> WinnerSet {
    names
        .iter()
        .map(|n| p.candidates().lookup(n).unwrap())
        .collect()
}

#[test]
fn table1_possible_winners_after_each_option() {
    // Rows of the first decision table: (voter, ballot, scores, Ŵ at horizon 1).
    let p = example1();
    let rule = RuleConfig::unanimity(3, 2).unwrap();
    let s = p.truthful_scores();
    assert_eq!(s.as_slice(), &[1, 1, 1]);
    let rows: [(usize, &str, [u32; 3], &[&str]); 9] = [
        (0, "a", [1, 1, 1], &[]),
        (0, "b", [0, 2, 1], &["b"]),
        (0, "c", [0, 1, 2], &["c"]),
        (1, "a", [2, 0, 1], &["a"]),
        (1, "b", [1, 1, 1], &[]),
        (1, "c", [1, 0, 2], &["c"]),
        (2, "a", [2, 1, 0], &["a"]),
        (2, "b", [1, 2, 0], &["b"]),
        (2, "c", [1, 1, 1], &[]),
    ];
    let ballots = p.truthful_ballots();
    for (voter, ballot, scores, winners) in rows {
        let to = p.candidates().lookup(ballot).unwrap();
        let next = s.moved(ballots.get(voter), to);
        assert_eq!(next.as_slice(), &scores);
        assert_eq!(possible_winners(&next, 1, &rule), set(&p, winners));
    }
    // Desired switches: 1 → b, 2 → c, 3 → a.
    let e = Election::new(&p, rule, AgentKind::Lazy);
    let desired: Vec<&str> = e
        .hand_raisers()
        .iter()
        .map(|h| p.candidates().name(h.desired))
        .collect();
    assert_eq!(desired, vec!["b", "c", "a"]);
}

#[test]
fn example1_forced_picks_reach_b() {
    let p = example1();
    let rule = RuleConfig::unanimity(3, 2).unwrap();
    for kind in AgentKind::ALL {
        let trace = run_with_picker(&p, rule, kind, &mut ScriptedPicker::new([0, 2]));
        let b = p.candidates().lookup("b").unwrap();
        assert_eq!(trace.winner, Outcome::Winner(b));
        assert_eq!(trace.vote_changes(), 2);
        let seq: Vec<Vec<u32>> = trace
            .steps
            .iter()
            .map(|s| s.scores_before.as_slice().to_vec())
            .chain(std::iter::once(trace.final_scores.as_slice().to_vec()))
            .collect();
        assert_eq!(seq, vec![vec![1, 1, 1], vec![0, 2, 1], vec![0, 3, 0]]);
        assert_eq!(trace.steps[0].hand_raisers.len(), 3);
        assert_eq!(trace.steps[1].hand_raisers.len(), 1);
        assert_eq!(trace.stop_time, 0);
    }
}

#[test]
fn table2_only_voter3_moves_at_last_step() {
    let p = example1();
    let rule = RuleConfig::unanimity(3, 2).unwrap();
    let mut e = Election::new(&p, rule, AgentKind::Lazy);
    e.step(&mut ScriptedPicker::new([0])).unwrap();
    assert_eq!(e.scores().as_slice(), &[0, 2, 1]);
    assert_eq!(e.view().possible, set(&p, &["b"]));
    // Ŵ is already {b}, but nobody holds σ ballots yet, so the run goes on.
    assert_eq!(e.terminal(), None);
    assert_eq!(
        RuleConfig {
            stop: StopRule::Singleton,
            ..rule
        }
        .terminal(e.scores(), e.t()),
        Some(Outcome::Winner(p.candidates().lookup("b").unwrap()))
    );
    let raisers = e.hand_raisers();
    assert_eq!(raisers.len(), 1);
    assert_eq!(raisers[0].voter, 2);
    assert_eq!(p.candidates().name(raisers[0].desired), "b");
}

#[test]
fn example1_without_time_defaults() {
    let p = example1();
    let trace = run_protocol(&p, RuleConfig::unanimity(3, 0).unwrap(), AgentKind::Lazy, 1);
    assert_eq!(trace.winner, Outcome::Default);
    assert!(trace.steps.is_empty());
}

#[test]
fn table3_lazy_voters_keep() {
    let p = example2();
    let rule = RuleConfig::unanimity(5, 4).unwrap();
    let e = Election::new(&p, rule, AgentKind::Lazy);
    assert_eq!(e.scores().as_slice(), &[2, 2, 1, 0]);
    assert_eq!(e.view().possible, set(&p, &["a", "b", "c"]));
    assert!(e.hand_raisers().is_empty());

    // The horizon-3 possible winner sets listed per option.
    let options: [(usize, [u32; 4], &[&str]); 8] = [
        (0, [1, 3, 1, 0], &["b"]),
        (0, [1, 2, 2, 0], &["b", "c"]),
        (0, [1, 2, 1, 1], &["b"]),
        (2, [3, 1, 1, 0], &["a"]),
        (2, [2, 1, 2, 0], &["a", "c"]),
        (4, [3, 2, 0, 0], &["a", "b"]),
        (4, [2, 3, 0, 0], &["a", "b"]),
        (4, [2, 2, 0, 1], &["a", "b"]),
    ];
    for (_, scores, winners) in options {
        assert_eq!(
            possible_winners(&ScoreVector::new(scores.to_vec()), 3, &rule),
            set(&p, winners)
        );
    }
}

#[test]
fn table4_proactive_voter5_switches_to_b() {
    let p = example2();
    let rule = RuleConfig::unanimity(5, 4).unwrap();
    let mut e = Election::new(&p, rule, AgentKind::Proactive);
    let raisers = e.hand_raisers();
    assert_eq!(raisers.len(), 1);
    assert_eq!(raisers[0].voter, 4);
    assert_eq!(p.candidates().name(raisers[0].desired), "b");
    e.step(&mut ScriptedPicker::new([4])).unwrap();
    assert_eq!(e.scores().as_slice(), &[2, 3, 0, 0]);
    assert_eq!(e.view().possible, set(&p, &["a", "b"]));
}

#[test]
fn unanimous_top_wins_without_changes() {
    let p = PreferenceProfile::from_names(
        &["x", "y", "z"],
        &[
            vec!["y", "x", "z"],
            vec!["y", "z", "x"],
            vec!["y", "x", "z"],
        ],
    )
    .unwrap();
    for tau in 0..5 {
        let trace = run_protocol(
            &p,
            RuleConfig::unanimity(3, tau).unwrap(),
            AgentKind::Lazy,
            3,
        );
        assert_eq!(
            trace.winner,
            Outcome::Winner(p.candidates().lookup("y").unwrap())
        );
        assert_eq!(trace.vote_changes(), 0);
    }
}
