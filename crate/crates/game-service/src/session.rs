//! The game as an event-sourced state machine.
//!
//! Commands ([`GameSession::join`], [`GameSession::start`],
//! [`GameSession::act`], [`GameSession::close_round`]) validate their input,
//! draw any randomness, and turn into [`Event`]s. Every event goes through
//! the same [`GameSession::apply`] path whether it was just produced or read
//! back from a log, so a replayed session is the live session.
//!
//! Randomness comes from one [`ProtocolRng`] per session, seeded from the
//! `Created` event: first one draw per seat for the preferences, then one
//! uniform index per round with at least one applicant, over the applicants
//! sorted by seat.

use std::collections::BTreeMap;

use cud_core::{
    best_response, AgentKind, BallotProfile, Candidate, Candidates, Outcome, Preference,
    ProtocolRng, RuleConfig, ScoreVector,
};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{
    classify_change, compute_metrics, reward, FillMode, GameError, GameMetrics, IrrationalityFlag,
    SessionConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeatKind {
    Human,
    Bot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seat {
    pub kind: SeatKind,
    pub name: String,
}

/// What a human sends for a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlayerAction {
    Keep,
    ChangeTo(Candidate),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "phase")]
pub enum Phase {
    Lobby,
    /// `t` rounds left, counting the current one.
    Round {
        t: u32,
    },
    Finished {
        outcome: Outcome,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallotMove {
    pub seat: usize,
    pub from: Candidate,
    pub to: Candidate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "event")]
pub enum Event {
    Created {
        session: String,
        config: SessionConfig,
        seed: u64,
    },
    Joined {
        seat: usize,
        name: String,
    },
    Started {
        seats: Vec<Seat>,
        preferences: Vec<Preference>,
        sigma: u32,
        tau: u32,
    },
    /// Tallies broadcast at the start of a round and the bot moves decided
    /// on them.
    RoundOpened {
        t: u32,
        tallies: ScoreVector,
        bot_moves: Vec<BallotMove>,
    },
    Acted {
        seat: usize,
        t: u32,
        action: PlayerAction,
        flags: Vec<IrrationalityFlag>,
    },
    RoundClosed {
        t: u32,
        applicants: Vec<usize>,
        picked: Option<BallotMove>,
    },
    Finished {
        outcome: Outcome,
        rewards: Vec<u32>,
        metrics: GameMetrics,
    },
}

/// One line of a session's event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub seq: u64,
    #[serde(flatten)]
    pub event: Event,
}

/// A human action together with the flags it earned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionRecord {
    pub seat: usize,
    pub t: u32,
    pub action: PlayerAction,
    pub flags: Vec<IrrationalityFlag>,
}

#[derive(Debug, Clone, Default)]
struct RoundState {
    bot_moves: Vec<BallotMove>,
    actions: BTreeMap<usize, PlayerAction>,
}

#[derive(Debug, Clone)]
pub struct GameSession {
    id: String,
    config: SessionConfig,
    candidates: Candidates,
    seed: u64,
    rng: ProtocolRng,
    seats: Vec<Seat>,
    preferences: Vec<Preference>,
    rule: Option<RuleConfig>,
    ballots: BallotProfile,
    scores: ScoreVector,
    truthful: ScoreVector,
    phase: Phase,
    round: RoundState,
    actions: Vec<ActionRecord>,
    moves: Vec<BallotMove>,
    rounds_used: u32,
    rewards: Vec<u32>,
    metrics: Option<GameMetrics>,
    log: Vec<LogRecord>,
}

impl GameSession {
    pub fn new(id: impl Into<String>, config: SessionConfig, seed: u64) -> Result<Self, GameError> {
        let id = id.into();
        config.validate()?;
        let mut session = Self::empty(id.clone(), config.clone(), seed)?;
        session.apply(
            Event::Created {
                session: id,
                config,
                seed,
            },
            false,
        )?;
        Ok(session)
    }

    fn empty(id: String, config: SessionConfig, seed: u64) -> Result<Self, GameError> {
        let candidates = config.candidates()?;
        let m = candidates.len();
        Ok(GameSession {
            id,
            config,
            candidates,
            seed,
            rng: cud_core::protocol_rng(seed),
            seats: Vec::new(),
            preferences: Vec::new(),
            rule: None,
            ballots: BallotProfile::new(Vec::new()),
            scores: ScoreVector::zeros(m),
            truthful: ScoreVector::zeros(m),
            phase: Phase::Lobby,
            round: RoundState::default(),
            actions: Vec::new(),
            moves: Vec::new(),
            rounds_used: 0,
            rewards: Vec::new(),
            metrics: None,
            log: Vec::new(),
        })
    }

    /// Rebuilds a session from its log, re-checking every event, including
    /// the random draws, against a fresh state machine.
    pub fn replay(records: &[LogRecord]) -> Result<Self, GameError> {
        let first = records.first().ok_or(GameError::EmptyLog)?;
        let Event::Created {
            session,
            config,
            seed,
        } = &first.event
        else {
            return Err(GameError::corrupt(
                first.seq,
                "log must start with `created`",
            ));
        };
        let mut replayed = Self::empty(session.clone(), config.clone(), *seed)?;
        for (expected, record) in records.iter().enumerate() {
            if record.seq != expected as u64 {
                return Err(GameError::OutOfOrder {
                    expected: expected as u64,
                    found: record.seq,
                });
            }
            replayed
                .apply(record.event.clone(), true)
                .map_err(|e| match e {
                    e @ (GameError::Corrupt { .. } | GameError::OutOfOrder { .. }) => e,
                    other => GameError::corrupt(record.seq, other.to_string()),
                })?;
        }
        Ok(replayed)
    }

    /// Metrics of a logged game; fails unless the log reaches the end.
    pub fn replay_metrics(records: &[LogRecord]) -> Result<GameMetrics, GameError> {
        let session = Self::replay(records)?;
        session.metrics.ok_or(GameError::Truncated)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn candidates(&self) -> &Candidates {
        &self.candidates
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn seats(&self) -> &[Seat] {
        &self.seats
    }

    pub fn humans(&self) -> impl Iterator<Item = usize> + '_ {
        self.seats
            .iter()
            .enumerate()
            .filter(|(_, s)| s.kind == SeatKind::Human)
            .map(|(i, _)| i)
    }

    pub fn seat_of(&self, name: &str) -> Option<usize> {
        self.seats.iter().position(|s| s.name == name)
    }

    pub fn preferences(&self) -> &[Preference] {
        &self.preferences
    }

    pub fn rule(&self) -> Option<RuleConfig> {
        self.rule
    }

    pub fn ballots(&self) -> &BallotProfile {
        &self.ballots
    }

    pub fn scores(&self) -> &ScoreVector {
        &self.scores
    }

    pub fn truthful_scores(&self) -> &ScoreVector {
        &self.truthful
    }

    pub fn actions(&self) -> &[ActionRecord] {
        &self.actions
    }

    pub fn moves(&self) -> &[BallotMove] {
        &self.moves
    }

    pub fn rounds_used(&self) -> u32 {
        self.rounds_used
    }

    pub fn rewards(&self) -> &[u32] {
        &self.rewards
    }

    pub fn metrics(&self) -> Option<&GameMetrics> {
        self.metrics.as_ref()
    }

    pub fn log(&self) -> &[LogRecord] {
        &self.log
    }

    pub fn is_finished(&self) -> bool {
        matches!(self.phase, Phase::Finished { .. })
    }

    /// Remaining rounds, counting the current one.
    pub fn remaining(&self) -> Option<u32> {
        match self.phase {
            Phase::Round { t } => Some(t),
            _ => None,
        }
    }

    /// Points seat `i` would get if `outcome` were final.
    pub fn points(&self, seat: usize, outcome: Outcome) -> u32 {
        match outcome {
            Outcome::Winner(w) => reward(
                self.preferences[seat].rank(w) + 1,
                self.candidates.len(),
                true,
            ),
            Outcome::Default => 0,
        }
    }

    /// Whether the lobby may start under the fill mode.
    pub fn ready(&self) -> bool {
        self.phase == Phase::Lobby && self.seats.len() >= self.config.humans_needed()
    }

    /// Every human has answered the current round.
    pub fn all_humans_acted(&self) -> bool {
        self.humans().all(|i| self.round.actions.contains_key(&i))
    }

    pub fn has_acted(&self, seat: usize) -> bool {
        self.round.actions.contains_key(&seat)
    }

    pub fn join(&mut self, name: &str) -> Result<usize, GameError> {
        if self.phase != Phase::Lobby {
            return Err(GameError::AlreadyStarted);
        }
        if self.config.fill == FillMode::BotOnly || self.seats.len() >= self.config.seats {
            return Err(GameError::SessionFull);
        }
        if self.seat_of(name).is_some() {
            return Err(GameError::DuplicateIdentity(name.to_string()));
        }
        let seat = self.seats.len();
        self.emit(Event::Joined {
            seat,
            name: name.to_string(),
        })?;
        Ok(seat)
    }

    /// Fills free seats per the fill mode, deals preferences and opens the
    /// first round (or finishes at once on a unanimous deal).
    pub fn start(&mut self) -> Result<(), GameError> {
        if self.phase != Phase::Lobby {
            return Err(GameError::AlreadyStarted);
        }
        if !self.ready() {
            return Err(GameError::NotStarted);
        }
        let mut seats = self.seats.clone();
        let n = match self.config.fill {
            FillMode::HumanOnly => seats.len(),
            FillMode::Mixed | FillMode::BotOnly => self.config.seats,
        };
        while seats.len() < n {
            seats.push(Seat {
                kind: SeatKind::Bot,
                name: format!("bot-{}", seats.len() + 1),
            });
        }
        let preferences = self.config.draw_preferences(n, &mut self.rng)?;
        self.emit(Event::Started {
            seats,
            preferences,
            sigma: n as u32,
            tau: self.config.tau,
        })?;
        self.advance_phase()
    }

    /// Records a human's answer for round `t`.
    pub fn act(
        &mut self,
        seat: usize,
        t: u32,
        action: PlayerAction,
    ) -> Result<Vec<IrrationalityFlag>, GameError> {
        let flags = self.check_action(seat, t, action)?;
        self.emit(Event::Acted {
            seat,
            t,
            action,
            flags: flags.clone(),
        })?;
        Ok(flags)
    }

    /// Ends the current round: one applicant, drawn uniformly, re-votes.
    pub fn close_round(&mut self) -> Result<Option<BallotMove>, GameError> {
        let Phase::Round { t } = self.phase else {
            return Err(self.not_in_round());
        };
        let applicants = self.applicants();
        let picked = (!applicants.is_empty())
            .then(|| self.rng.random_range(0..applicants.len()))
            .map(|i| applicants[i]);
        self.emit(Event::RoundClosed {
            t,
            applicants: applicants.iter().map(|m| m.seat).collect(),
            picked,
        })?;
        self.advance_phase()?;
        Ok(picked)
    }

    /// Plays every round with no human input (humans keep).
    pub fn run_to_end(&mut self) -> Result<(), GameError> {
        while !self.is_finished() {
            self.close_round()?;
        }
        Ok(())
    }

    fn not_in_round(&self) -> GameError {
        match self.phase {
            Phase::Lobby => GameError::NotStarted,
            _ => GameError::Finished,
        }
    }

    fn check_action(
        &self,
        seat: usize,
        t: u32,
        action: PlayerAction,
    ) -> Result<Vec<IrrationalityFlag>, GameError> {
        let Phase::Round { t: current } = self.phase else {
            return Err(self.not_in_round());
        };
        let kind = self.seats.get(seat).ok_or(GameError::NoSeat(seat))?.kind;
        if kind != SeatKind::Human {
            return Err(GameError::NotHuman(seat));
        }
        if t != current {
            return Err(GameError::WrongRound { got: t, current });
        }
        if self.round.actions.contains_key(&seat) {
            return Err(GameError::AlreadyActed(seat));
        }
        match action {
            PlayerAction::Keep => Ok(Vec::new()),
            PlayerAction::ChangeTo(c) => {
                if !self.candidates.contains(c) {
                    return Err(cud_core::ModelError::UnknownCandidate(c.to_string()).into());
                }
                Ok(classify_change(
                    &self.preferences[seat],
                    self.ballots.get(seat),
                    c,
                    &self.scores,
                ))
            }
        }
    }

    fn bot_moves(&self, t: u32) -> Vec<BallotMove> {
        let rule = self.rule.expect("bots only move after the start");
        self.seats
            .iter()
            .enumerate()
            .filter(|(_, s)| s.kind == SeatKind::Bot)
            .filter_map(|(seat, _)| {
                let from = self.ballots.get(seat);
                let to = best_response(
                    AgentKind::Lazy,
                    &self.preferences[seat],
                    from,
                    &self.scores,
                    t,
                    &rule,
                );
                (to != from).then_some(BallotMove { seat, from, to })
            })
            .collect()
    }

    /// Bots that want to move plus humans who asked for a real change, by seat.
    fn applicants(&self) -> Vec<BallotMove> {
        let mut all: Vec<BallotMove> = self.round.bot_moves.clone();
        for (&seat, action) in &self.round.actions {
            if let PlayerAction::ChangeTo(to) = *action {
                let from = self.ballots.get(seat);
                if to != from {
                    all.push(BallotMove { seat, from, to });
                }
            }
        }
        all.sort_by_key(|m| m.seat);
        all
    }

    /// After a start or a closed round: finish, or open the next round.
    fn advance_phase(&mut self) -> Result<(), GameError> {
        let Some(t) = self.pending_round() else {
            let outcome = self.terminal_outcome();
            let n = self.seats.len();
            let rewards: Vec<u32> = (0..n).map(|i| self.points(i, outcome)).collect();
            let metrics = self.metrics_for(outcome, &rewards);
            return self.emit(Event::Finished {
                outcome,
                rewards,
                metrics,
            });
        };
        let bot_moves = self.bot_moves(t);
        self.emit(Event::RoundOpened {
            t,
            tallies: self.scores.clone(),
            bot_moves,
        })
    }

    fn consensus(&self) -> Option<Candidate> {
        let sigma = self.rule?.sigma;
        self.scores
            .iter()
            .find(|&(_, s)| s >= sigma)
            .map(|(c, _)| c)
    }

    /// The round to open next, `None` when the game is over.
    fn pending_round(&self) -> Option<u32> {
        if self.consensus().is_some() {
            return None;
        }
        let t = match self.phase {
            Phase::Lobby => self.rule?.tau,
            Phase::Round { t } => t,
            Phase::Finished { .. } => return None,
        };
        (t > 0).then_some(t)
    }

    fn terminal_outcome(&self) -> Outcome {
        self.consensus().map_or(Outcome::Default, Outcome::Winner)
    }

    fn metrics_for(&self, outcome: Outcome, rewards: &[u32]) -> GameMetrics {
        compute_metrics(
            outcome,
            &self.truthful,
            self.rounds_used,
            self.moves.len() as u32,
            rewards,
            &self.actions,
        )
    }

    fn emit(&mut self, event: Event) -> Result<(), GameError> {
        self.apply(event, false)
    }

    /// Validates `event` against the current state and applies it. With
    /// `redraw`, random draws are repeated and must match the event.
    pub fn apply(&mut self, event: Event, redraw: bool) -> Result<(), GameError> {
        let seq = self.log.len() as u64;
        let bad = |reason: String| Err(GameError::corrupt(seq, reason));
        match &event {
            Event::Created {
                session,
                config,
                seed,
            } => {
                if seq != 0 {
                    return bad("`created` after the first record".into());
                }
                if *session != self.id || *config != self.config || *seed != self.seed {
                    return bad("`created` does not match the session".into());
                }
            }
            Event::Joined { seat, name } => {
                if self.phase != Phase::Lobby || self.rule.is_some() {
                    return bad("join after the start".into());
                }
                if *seat != self.seats.len() || *seat >= self.config.seats {
                    return bad(format!("join into seat {seat}"));
                }
                if self.seat_of(name).is_some() {
                    return bad(format!("duplicate player {name:?}"));
                }
                self.seats.push(Seat {
                    kind: SeatKind::Human,
                    name: name.clone(),
                });
            }
            Event::Started {
                seats,
                preferences,
                sigma,
                tau,
            } => {
                if self.phase != Phase::Lobby || self.rule.is_some() || !self.ready() {
                    return bad("start from a lobby that is not ready".into());
                }
                let n = seats.len();
                if n < self.seats.len()
                    || seats[..self.seats.len()] != self.seats[..]
                    || seats[self.seats.len()..]
                        .iter()
                        .any(|s| s.kind != SeatKind::Bot)
                    || preferences.len() != n
                    || *sigma != n as u32
                    || *tau != self.config.tau
                {
                    return bad("start does not match the lobby".into());
                }
                if redraw && self.config.draw_preferences(n, &mut self.rng)? != *preferences {
                    return bad("preferences differ from the seeded deal".into());
                }
                let rule = RuleConfig::unanimity(n, *tau)?;
                self.seats = seats.clone();
                self.preferences = preferences.clone();
                self.ballots = BallotProfile::new(preferences.iter().map(|p| p.top()).collect());
                self.scores = ScoreVector::from_ballots(&self.ballots, self.candidates.len());
                self.truthful = self.scores.clone();
                self.rule = Some(rule);
            }
            Event::RoundOpened {
                t,
                tallies,
                bot_moves,
            } => {
                if self.pending_round() != Some(*t) {
                    return bad(format!("round {t} opened out of turn"));
                }
                if *tallies != self.scores || *bot_moves != self.bot_moves(*t) {
                    return bad(format!("round {t} state differs from the replay"));
                }
                self.phase = Phase::Round { t: *t };
                self.round = RoundState {
                    bot_moves: bot_moves.clone(),
                    actions: BTreeMap::new(),
                };
            }
            Event::Acted {
                seat,
                t,
                action,
                flags,
            } => {
                if self.check_action(*seat, *t, *action)? != *flags {
                    return bad(format!("flags of seat {seat} differ from the replay"));
                }
                self.round.actions.insert(*seat, *action);
                self.actions.push(ActionRecord {
                    seat: *seat,
                    t: *t,
                    action: *action,
                    flags: flags.clone(),
                });
            }
            Event::RoundClosed {
                t,
                applicants,
                picked,
            } => {
                if self.phase != (Phase::Round { t: *t }) {
                    return bad(format!("round {t} closed out of turn"));
                }
                let expected = self.applicants();
                if expected.iter().map(|m| m.seat).collect::<Vec<_>>() != *applicants {
                    return bad(format!("applicants of round {t} differ from the replay"));
                }
                match picked {
                    None if !expected.is_empty() => {
                        return bad(format!("round {t} had applicants but no pick"))
                    }
                    Some(p) if !expected.contains(p) => {
                        return bad(format!("round {t} picked a non-applicant"))
                    }
                    _ => {}
                }
                if redraw && !expected.is_empty() {
                    let i = self.rng.random_range(0..expected.len());
                    if Some(expected[i]) != *picked {
                        return bad(format!("round {t} pick differs from the seeded draw"));
                    }
                }
                if let Some(m) = picked {
                    self.ballots.set(m.seat, m.to);
                    self.scores.move_vote(m.from, m.to);
                    self.moves.push(*m);
                }
                self.rounds_used += 1;
                self.phase = Phase::Round { t: t - 1 };
                self.round = RoundState::default();
            }
            Event::Finished {
                outcome,
                rewards,
                metrics,
            } => {
                if self.rule.is_none() || self.is_finished() || self.pending_round().is_some() {
                    return bad("finish while the game is still running".into());
                }
                let expected = self.terminal_outcome();
                let n = self.seats.len();
                let expected_rewards: Vec<u32> = (0..n).map(|i| self.points(i, expected)).collect();
                if *outcome != expected || *rewards != expected_rewards {
                    return bad("outcome or rewards differ from the replay".into());
                }
                if *metrics != self.metrics_for(expected, &expected_rewards) {
                    return bad("metrics differ from the replay".into());
                }
                self.phase = Phase::Finished { outcome: *outcome };
                self.rewards = rewards.clone();
                self.metrics = Some(metrics.clone());
            }
        }
        self.log.push(LogRecord { seq, event });
        Ok(())
    }
}
