//! Mechanical checks of the four trajectory lemmas, usable on enumerated
//! game DAGs (as a [`Visitor`]) and on single engine traces.

use std::fmt;

use cud_core::{
    possible_winners, BallotChange, Candidate, GameTrace, PreferenceProfile, RuleConfig,
    ScoreVector,
};
use serde::{Deserialize, Serialize};

use crate::{EdgeView, StateView, Visitor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma {
    /// Ŵ never gains members.
    Monotone,
    /// A candidate whose tally grows is a possible winner afterwards.
    GainInSet,
    /// A ballot inside Ŵ is the voter's favourite member of Ŵ.
    BallotIsTop,
    /// Votes only move towards weakly stronger candidates.
    SwitchUp,
}

impl Lemma {
    pub const ALL: [Lemma; 4] = [
        Lemma::Monotone,
        Lemma::GainInSet,
        Lemma::BallotIsTop,
        Lemma::SwitchUp,
    ];

    pub fn number(self) -> u8 {
        match self {
            Lemma::Monotone => 1,
            Lemma::GainInSet => 2,
            Lemma::BallotIsTop => 3,
            Lemma::SwitchUp => 4,
        }
    }
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lemma{}", self.number())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub lemma: Lemma,
    pub t: u32,
    pub detail: String,
}

/// Lemma 3 on one state.
pub fn check_state(
    profile: &PreferenceProfile,
    rule: &RuleConfig,
    ballots: &[Candidate],
    scores: &ScoreVector,
    t: u32,
    out: &mut Vec<Violation>,
) {
    let w = possible_winners(scores, t, rule);
    for (i, &b) in ballots.iter().enumerate() {
        if !w.contains(b) {
            continue;
        }
        let top = profile.voter(i).top_of(w);
        if top != Some(b) {
            out.push(Violation {
                lemma: Lemma::BallotIsTop,
                t,
                detail: format!(
                    "voter {i} ballots {b} but prefers {top:?} within {w:?} at {scores}"
                ),
            });
        }
    }
}

/// Lemmas 1, 2 and 4 on one transition `t → t − 1`.
pub fn check_edge(
    rule: &RuleConfig,
    before: &ScoreVector,
    t: u32,
    change: Option<BallotChange>,
    after: &ScoreVector,
    out: &mut Vec<Violation>,
) {
    let w0 = possible_winners(before, t, rule);
    let w1 = possible_winners(after, t - 1, rule);
    if !w1.is_subset(w0) {
        out.push(Violation {
            lemma: Lemma::Monotone,
            t,
            detail: format!("{w0:?} grew to {w1:?} ({before} -> {after})"),
        });
    }
    for (c, s) in after.iter() {
        if s > before.get(c) && !w1.contains(c) {
            out.push(Violation {
                lemma: Lemma::GainInSet,
                t,
                detail: format!("{c} gained a vote but is outside {w1:?} at {after}"),
            });
        }
    }
    if let Some(ch) = change {
        if before.get(ch.from) > before.get(ch.to) {
            out.push(Violation {
                lemma: Lemma::SwitchUp,
                t,
                detail: format!(
                    "voter {} moved {} -> {} on {before}",
                    ch.voter, ch.from, ch.to
                ),
            });
        }
    }
}

/// All four lemmas along one recorded run.
pub fn check_trace(trace: &GameTrace) -> Vec<Violation> {
    let mut out = Vec::new();
    let rule = &trace.rule;
    let mut ballots = trace.profile.truthful_ballots().as_slice().to_vec();
    for (k, step) in trace.steps.iter().enumerate() {
        check_state(
            &trace.profile,
            rule,
            &ballots,
            &step.scores_before,
            step.t,
            &mut out,
        );
        if let Some(ch) = step.change {
            ballots[ch.voter] = ch.to;
        }
        let after = trace
            .steps
            .get(k + 1)
            .map_or(&trace.final_scores, |s| &s.scores_before);
        check_edge(
            rule,
            &step.scores_before,
            step.t,
            step.change,
            after,
            &mut out,
        );
    }
    check_state(
        &trace.profile,
        rule,
        &ballots,
        &trace.final_scores,
        trace.stop_time,
        &mut out,
    );
    out
}

/// Collects lemma violations over a whole enumerated DAG.
#[derive(Debug, Default)]
pub struct LemmaChecker {
    pub violations: Vec<Violation>,
    pub states: usize,
    pub edges: usize,
}

impl Visitor for LemmaChecker {
    fn state(&mut self, profile: &PreferenceProfile, rule: &RuleConfig, state: StateView<'_>) {
        self.states += 1;
        check_state(
            profile,
            rule,
            state.ballots.as_slice(),
            state.scores,
            state.t,
            &mut self.violations,
        );
    }

    fn edge(&mut self, _profile: &PreferenceProfile, rule: &RuleConfig, edge: EdgeView<'_>) {
        self.edges += 1;
        check_edge(
            rule,
            edge.from.scores,
            edge.from.t,
            edge.change,
            edge.to_scores,
            &mut self.violations,
        );
    }
}
