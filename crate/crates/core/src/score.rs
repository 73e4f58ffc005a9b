use std::fmt;

use serde::{Deserialize, Serialize};

use crate::Candidate;

/// Current ballot `b_i^t` of every voter. Ballots are always valid candidates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BallotProfile(Vec<Candidate>);

impl BallotProfile {
    pub fn new(ballots: Vec<Candidate>) -> Self {
        BallotProfile(ballots)
    }

    pub fn get(&self, voter: usize) -> Candidate {
        self.0[voter]
    }

    pub fn set(&mut self, voter: usize, c: Candidate) {
        self.0[voter] = c;
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Candidate] {
        &self.0
    }
}

/// Per-candidate tallies `s = sc(b)` over `C⁺`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScoreVector(Vec<u32>);

impl ScoreVector {
    pub fn new(scores: Vec<u32>) -> Self {
        ScoreVector(scores)
    }

    pub fn zeros(m: usize) -> Self {
        ScoreVector(vec![0; m])
    }

    /// `sc(b)`: counts how many voters ballot each of the `m` candidates.
    pub fn from_ballots(ballots: &BallotProfile, m: usize) -> Self {
        let mut scores = vec![0u32; m];
        for c in ballots.as_slice() {
            scores[c.index()] += 1;
        }
        ScoreVector(scores)
    }

    pub fn get(&self, c: Candidate) -> u32 {
        self.0[c.index()]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn max(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// `s − from + to`; identity when `from == to`.
    pub fn moved(&self, from: Candidate, to: Candidate) -> ScoreVector {
        let mut next = self.clone();
        next.move_vote(from, to);
        next
    }

    pub fn move_vote(&mut self, from: Candidate, to: Candidate) {
        debug_assert!(self.0[from.index()] > 0, "moving a vote off an empty tally");
        self.0[from.index()] -= 1;
        self.0[to.index()] += 1;
    }

    pub fn iter(&self) -> impl Iterator<Item = (Candidate, u32)> + '_ {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &s)| (Candidate::from(i), s))
    }
}

impl fmt::Display for ScoreVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}
