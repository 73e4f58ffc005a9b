//! Exhaustive expansion of every random pick the protocol can make.

use std::collections::HashMap;

use cud_core::{
    AgentKind, BallotChange, BallotProfile, Election, Outcome, PreferenceProfile, RuleConfig,
    ScoreVector, WinnerSet,
};
use serde::{Deserialize, Serialize};

use crate::OracleError;

/// Size limits that keep exact enumeration tractable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_voters: usize,
    pub max_candidates: usize,
    pub max_tau: u32,
    pub max_states: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_voters: 8,
            max_candidates: 5,
            max_tau: 8,
            max_states: 2_000_000,
        }
    }
}

impl Budget {
    pub fn check(&self, profile: &PreferenceProfile, rule: &RuleConfig) -> Result<(), OracleError> {
        let over = |what, got: usize, limit: usize| {
            (got > limit).then_some(OracleError::Budget { what, got, limit })
        };
        let err = over("n", profile.n(), self.max_voters)
            .or_else(|| over("m", profile.m(), self.max_candidates))
            .or_else(|| over("tau", rule.tau as usize, self.max_tau as usize));
        match err {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// Everything the protocol can end in, over all pick sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachableOutcome {
    /// `Ĉ`: valid candidates some branch declares as the winner.
    pub winners: WinnerSet,
    pub default_reachable: bool,
    /// Number of distinct pick sequences (root-to-leaf paths), saturating.
    pub branch_count: u128,
    /// Exact probability of each candidate winning under uniform picks,
    /// with the default ψ in the last slot.
    pub distribution: Vec<f64>,
    /// Distinct `(ballots, t)` states expanded.
    pub states: usize,
}

impl ReachableOutcome {
    pub fn contains(&self, outcome: Outcome) -> bool {
        match outcome {
            Outcome::Winner(c) => self.winners.contains(c),
            Outcome::Default => self.default_reachable,
        }
    }

    pub fn probability(&self, outcome: Outcome) -> f64 {
        match outcome {
            Outcome::Winner(c) => self.distribution[c.index()],
            Outcome::Default => *self.distribution.last().unwrap_or(&0.0),
        }
    }
}

/// A state of the game DAG as seen by a [`Visitor`].
#[derive(Debug, Clone, Copy)]
pub struct StateView<'a> {
    pub ballots: &'a BallotProfile,
    pub scores: &'a ScoreVector,
    pub t: u32,
}

/// One pick out of a non-terminal state. `change` is `None` on an empty tick.
#[derive(Debug, Clone, Copy)]
pub struct EdgeView<'a> {
    pub from: StateView<'a>,
    pub change: Option<BallotChange>,
    pub to_scores: &'a ScoreVector,
}

/// Hooks called once per distinct state and once per distinct edge.
pub trait Visitor {
    fn state(&mut self, _profile: &PreferenceProfile, _rule: &RuleConfig, _state: StateView<'_>) {}
    fn edge(&mut self, _profile: &PreferenceProfile, _rule: &RuleConfig, _edge: EdgeView<'_>) {}
}

impl Visitor for () {}

struct Node {
    winners: WinnerSet,
    default: bool,
    branches: u128,
    dist: Vec<f64>,
}

struct Walker<'p, V> {
    profile: &'p PreferenceProfile,
    rule: RuleConfig,
    kind: AgentKind,
    max_states: usize,
    memo: HashMap<(BallotProfile, u32), usize>,
    nodes: Vec<Node>,
    visitor: V,
}

impl<V: Visitor> Walker<'_, V> {
    fn explore(&mut self, ballots: BallotProfile, t: u32) -> Result<usize, OracleError> {
        let key = (ballots, t);
        if let Some(&ix) = self.memo.get(&key) {
            return Ok(ix);
        }
        if self.nodes.len() >= self.max_states {
            return Err(OracleError::StateLimit(self.max_states));
        }
        let (ballots, t) = key;
        let m = self.profile.m();
        let election =
            Election::from_state(self.profile, self.rule, self.kind, ballots.clone(), t)?;
        let here = StateView {
            ballots: &ballots,
            scores: election.scores(),
            t,
        };
        self.visitor.state(self.profile, &self.rule, here);

        let node = if let Some(outcome) = election.terminal() {
            let mut dist = vec![0.0; m + 1];
            let (winners, default) = match outcome {
                Outcome::Winner(c) => {
                    dist[c.index()] = 1.0;
                    (WinnerSet::singleton(c), false)
                }
                Outcome::Default => {
                    dist[m] = 1.0;
                    (WinnerSet::EMPTY, true)
                }
            };
            Node {
                winners,
                default,
                branches: 1,
                dist,
            }
        } else {
            let raisers = election.hand_raisers();
            let picks: Vec<Option<BallotChange>> = if raisers.is_empty() {
                vec![None]
            } else {
                raisers
                    .iter()
                    .map(|h| {
                        Some(BallotChange {
                            voter: h.voter,
                            from: ballots.get(h.voter),
                            to: h.desired,
                        })
                    })
                    .collect()
            };
            let weight = 1.0 / picks.len() as f64;
            let mut acc = Node {
                winners: WinnerSet::EMPTY,
                default: false,
                branches: 0,
                dist: vec![0.0; m + 1],
            };
            for change in picks {
                let mut next = election.clone();
                next.advance(change);
                self.visitor.edge(
                    self.profile,
                    &self.rule,
                    EdgeView {
                        from: here,
                        change,
                        to_scores: next.scores(),
                    },
                );
                let child = self.explore(next.ballots().clone(), next.t())?;
                let child = &self.nodes[child];
                acc.winners = acc.winners.union(child.winners);
                acc.default |= child.default;
                acc.branches = acc.branches.saturating_add(child.branches);
                for (a, p) in acc.dist.iter_mut().zip(&child.dist) {
                    *a += weight * p;
                }
            }
            acc
        };
        let ix = self.nodes.len();
        self.nodes.push(node);
        self.memo.insert((ballots, t), ix);
        Ok(ix)
    }
}

/// Enumerates every branch of the protocol from the truthful start.
pub fn enumerate(
    profile: &PreferenceProfile,
    rule: RuleConfig,
    kind: AgentKind,
    budget: &Budget,
) -> Result<ReachableOutcome, OracleError> {
    enumerate_with(profile, rule, kind, budget, ()).map(|(r, ())| r)
}

/// [`enumerate`] with a visitor that sees every distinct state and edge.
pub fn enumerate_with<V: Visitor>(
    profile: &PreferenceProfile,
    rule: RuleConfig,
    kind: AgentKind,
    budget: &Budget,
    visitor: V,
) -> Result<(ReachableOutcome, V), OracleError> {
    budget.check(profile, &rule)?;
    rule.validate(profile.n())?;
    let mut walker = Walker {
        profile,
        rule,
        kind,
        max_states: budget.max_states,
        memo: HashMap::new(),
        nodes: Vec::new(),
        visitor,
    };
    let root = walker.explore(profile.truthful_ballots(), rule.tau)?;
    let states = walker.nodes.len();
    let root = walker.nodes.swap_remove(root);
    Ok((
        ReachableOutcome {
            winners: root.winners,
            default_reachable: root.default,
            branch_count: root.branches,
            distribution: root.dist,
            states,
        },
        walker.visitor,
    ))
}
