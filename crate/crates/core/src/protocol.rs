//! The round protocol as an explicit state machine.
//!
//! Draw order: at every step with a non-empty hand-raiser set `I`, exactly one
//! uniform index in `0..|I|` is drawn from the run's [`ProtocolRng`], over `I`
//! sorted by voter id. Steps with `I = ∅` draw nothing.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{
    best_response, mdvr, protocol_rng, AgentKind, BallotProfile, Candidate, ModelError, Outcome,
    OutcomeView, PreferenceProfile, ProtocolRng, RuleConfig, ScoreVector,
};

/// A voter who wants to re-vote, with the ballot she would cast.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HandRaise {
    pub voter: usize,
    pub desired: Candidate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BallotChange {
    pub voter: usize,
    pub from: Candidate,
    pub to: Candidate,
}

/// One iteration of the protocol loop at `t` remaining steps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u32,
    pub scores_before: ScoreVector,
    pub hand_raisers: Vec<HandRaise>,
    pub picked: Option<usize>,
    pub change: Option<BallotChange>,
}

/// Full record of one run. Replaying `(profile, rule, kind, seed)` through
/// [`run_protocol`] reproduces it exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameTrace {
    pub rule: RuleConfig,
    pub kind: AgentKind,
    pub profile: PreferenceProfile,
    pub seed: Option<u64>,
    pub steps: Vec<StepRecord>,
    pub final_scores: ScoreVector,
    pub winner: Outcome,
    pub stop_time: u32,
}

impl GameTrace {
    pub fn vote_changes(&self) -> usize {
        self.steps.iter().filter(|s| s.change.is_some()).count()
    }

    pub fn converged(&self) -> bool {
        !self.winner.is_default()
    }
}

/// Chooses one voter out of a non-empty hand-raiser set.
pub trait Picker {
    /// Returns an index into `hand_raisers` (sorted by voter id, never empty).
    fn pick(&mut self, hand_raisers: &[HandRaise]) -> usize;
}

/// Uniform picks from a seeded [`ProtocolRng`].
#[derive(Debug, Clone)]
pub struct SeededPicker {
    rng: ProtocolRng,
}

impl SeededPicker {
    pub fn new(seed: u64) -> Self {
        SeededPicker {
            rng: protocol_rng(seed),
        }
    }

    pub fn from_rng(rng: ProtocolRng) -> Self {
        SeededPicker { rng }
    }
}

impl Picker for SeededPicker {
    fn pick(&mut self, hand_raisers: &[HandRaise]) -> usize {
        self.rng.random_range(0..hand_raisers.len())
    }
}

/// Forces a fixed sequence of voters, one per non-empty draw.
///
/// # Panics
///
/// When the script runs out or names a voter who did not raise her hand.
#[derive(Debug, Clone, Default)]
pub struct ScriptedPicker {
    script: VecDeque<usize>,
}

impl ScriptedPicker {
    pub fn new(voters: impl IntoIterator<Item = usize>) -> Self {
        ScriptedPicker {
            script: voters.into_iter().collect(),
        }
    }
}

impl Picker for ScriptedPicker {
    fn pick(&mut self, hand_raisers: &[HandRaise]) -> usize {
        let voter = self.script.pop_front().expect("scripted picks exhausted");
        hand_raisers
            .iter()
            .position(|h| h.voter == voter)
            .unwrap_or_else(|| panic!("scripted voter {voter} did not raise a hand"))
    }
}

/// Mutable protocol state: current ballots, tallies and remaining steps.
#[derive(Debug, Clone)]
pub struct Election<'p> {
    profile: &'p PreferenceProfile,
    rule: RuleConfig,
    kind: AgentKind,
    ballots: BallotProfile,
    scores: ScoreVector,
    t: u32,
}

impl<'p> Election<'p> {
    /// Initial state: `t = τ`, every voter on her truthful top.
    pub fn new(profile: &'p PreferenceProfile, rule: RuleConfig, kind: AgentKind) -> Self {
        let ballots = profile.truthful_ballots();
        let scores = ScoreVector::from_ballots(&ballots, profile.m());
        Election {
            profile,
            rule,
            kind,
            ballots,
            scores,
            t: rule.tau,
        }
    }

    /// Arbitrary intermediate state, e.g. for exhaustive exploration.
    pub fn from_state(
        profile: &'p PreferenceProfile,
        rule: RuleConfig,
        kind: AgentKind,
        ballots: BallotProfile,
        t: u32,
    ) -> Result<Self, ModelError> {
        if ballots.len() != profile.n() {
            return Err(ModelError::BallotCount {
                got: ballots.len(),
                expected: profile.n(),
            });
        }
        if let Some(c) = ballots
            .as_slice()
            .iter()
            .find(|c| !profile.candidates().contains(**c))
        {
            return Err(ModelError::UnknownCandidate(c.to_string()));
        }
        let scores = ScoreVector::from_ballots(&ballots, profile.m());
        Ok(Election {
            profile,
            rule,
            kind,
            ballots,
            scores,
            t,
        })
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn ballots(&self) -> &BallotProfile {
        &self.ballots
    }

    pub fn scores(&self) -> &ScoreVector {
        &self.scores
    }

    pub fn rule(&self) -> &RuleConfig {
        &self.rule
    }

    pub fn kind(&self) -> AgentKind {
        self.kind
    }

    pub fn profile(&self) -> &'p PreferenceProfile {
        self.profile
    }

    pub fn view(&self) -> OutcomeView {
        mdvr(&self.scores, self.t, &self.rule)
    }

    /// `I = {i : w_i ≠ b_i^t}` with each voter's desired ballot, by voter id.
    pub fn hand_raisers(&self) -> Vec<HandRaise> {
        if self.t == 0 {
            return Vec::new();
        }
        self.profile
            .voters()
            .iter()
            .enumerate()
            .filter_map(|(voter, pref)| {
                let current = self.ballots.get(voter);
                let desired =
                    best_response(self.kind, pref, current, &self.scores, self.t, &self.rule);
                (desired != current).then_some(HandRaise { voter, desired })
            })
            .collect()
    }

    /// Applies an optional change and moves one step closer to the deadline.
    pub fn advance(&mut self, change: Option<BallotChange>) {
        if let Some(ch) = change {
            debug_assert_eq!(self.ballots.get(ch.voter), ch.from);
            self.ballots.set(ch.voter, ch.to);
            self.scores.move_vote(ch.from, ch.to);
        }
        self.t -= 1;
    }

    /// Final outcome if the run is over under the rule's [`StopRule`](crate::StopRule).
    pub fn terminal(&self) -> Option<Outcome> {
        self.rule.terminal(&self.scores, self.t)
    }

    /// One loop iteration on a non-terminal state (which implies `t ≥ 1`).
    pub fn step(&mut self, picker: &mut impl Picker) -> Result<StepRecord, ModelError> {
        if self.t == 0 || self.terminal().is_some() {
            return Err(ModelError::AlreadyResolved);
        }
        let hand_raisers = self.hand_raisers();
        let (picked, change) = if hand_raisers.is_empty() {
            (None, None)
        } else {
            let h = hand_raisers[picker.pick(&hand_raisers)];
            let change = BallotChange {
                voter: h.voter,
                from: self.ballots.get(h.voter),
                to: h.desired,
            };
            (Some(h.voter), Some(change))
        };
        let record = StepRecord {
            t: self.t,
            scores_before: self.scores.clone(),
            hand_raisers,
            picked,
            change,
        };
        self.advance(change);
        Ok(record)
    }

    /// Steps until the run is over. Always terminates by `t = 0`.
    pub fn run(mut self, picker: &mut impl Picker) -> (Vec<StepRecord>, Outcome, u32, ScoreVector) {
        let mut steps = Vec::new();
        loop {
            if let Some(outcome) = self.terminal() {
                return (steps, outcome, self.t, self.scores);
            }
            let record = self
                .step(picker)
                .expect("non-terminal state always has t >= 1");
            steps.push(record);
        }
    }
}

pub fn run_with_picker(
    profile: &PreferenceProfile,
    rule: RuleConfig,
    kind: AgentKind,
    picker: &mut impl Picker,
) -> GameTrace {
    let (steps, winner, stop_time, final_scores) = Election::new(profile, rule, kind).run(picker);
    GameTrace {
        rule,
        kind,
        profile: profile.clone(),
        seed: None,
        steps,
        final_scores,
        winner,
        stop_time,
    }
}

/// Runs the protocol with uniform picks drawn from `protocol_rng(seed)`.
pub fn run_protocol(
    profile: &PreferenceProfile,
    rule: RuleConfig,
    kind: AgentKind,
    seed: u64,
) -> GameTrace {
    let mut trace = run_with_picker(profile, rule, kind, &mut SeededPicker::new(seed));
    trace.seed = Some(seed);
    trace
}
