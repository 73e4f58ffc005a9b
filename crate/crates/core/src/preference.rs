use std::cmp::Ordering;

use serde::{Deserialize, Deserializer, Serialize};

use crate::{BallotProfile, Candidate, Candidates, ModelError, Outcome, ScoreVector, WinnerSet};

/// A voter's truthful strict ranking over `C⁺`; ψ is implicitly ranked last.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Preference {
    order: Vec<Candidate>,
    #[serde(skip)]
    position: Vec<u16>,
}

impl<'de> Deserialize<'de> for Preference {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let order = Vec::<Candidate>::deserialize(de)?;
        let m = order.len();
        Preference::new(order, m).map_err(serde::de::Error::custom)
    }
}

impl Preference {
    /// `order[0]` is the most preferred candidate; must be a permutation of `0..m`.
    pub fn new(order: Vec<Candidate>, m: usize) -> Result<Self, ModelError> {
        if order.len() != m {
            return Err(ModelError::NotAPermutation { expected: m });
        }
        let mut position = vec![u16::MAX; m];
        for (rank, c) in order.iter().enumerate() {
            if c.index() >= m || position[c.index()] != u16::MAX {
                return Err(ModelError::NotAPermutation { expected: m });
            }
            position[c.index()] = rank as u16;
        }
        Ok(Preference { order, position })
    }

    pub fn from_indices(order: &[usize]) -> Result<Self, ModelError> {
        Self::new(
            order.iter().copied().map(Candidate::from).collect(),
            order.len(),
        )
    }

    pub fn order(&self) -> &[Candidate] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Zero-based rank (0 = favourite).
    pub fn rank(&self, c: Candidate) -> usize {
        self.position[c.index()] as usize
    }

    /// `top_i(C)`.
    pub fn top(&self) -> Candidate {
        self.order[0]
    }

    /// True if `a` is strictly preferred to `b`.
    pub fn prefers(&self, a: Candidate, b: Candidate) -> bool {
        self.position[a.index()] < self.position[b.index()]
    }

    /// Best member of `set`, `None` when the set is empty.
    pub fn top_of(&self, set: WinnerSet) -> Option<Candidate> {
        set.iter().min_by_key(|c| self.position[c.index()])
    }

    /// Compares two outcomes; `Greater` means `a` is preferred. ψ is below
    /// every valid candidate.
    pub fn compare(&self, a: Outcome, b: Outcome) -> Ordering {
        match (a, b) {
            (Outcome::Default, Outcome::Default) => Ordering::Equal,
            (Outcome::Default, Outcome::Winner(_)) => Ordering::Less,
            (Outcome::Winner(_), Outcome::Default) => Ordering::Greater,
            (Outcome::Winner(x), Outcome::Winner(y)) => self.rank(y).cmp(&self.rank(x)),
        }
    }
}

/// The truthful profile `a = (a_1, …, a_n)` over a shared candidate set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferenceProfile {
    candidates: Candidates,
    voters: Vec<Preference>,
}

impl PreferenceProfile {
    pub fn new(candidates: Candidates, voters: Vec<Preference>) -> Result<Self, ModelError> {
        if voters.is_empty() {
            return Err(ModelError::NoVoters);
        }
        if let Some(voter) = voters.iter().position(|p| p.len() != candidates.len()) {
            return Err(ModelError::CandidateMismatch { voter });
        }
        Ok(PreferenceProfile { candidates, voters })
    }

    /// Builds a profile from candidate names and per-voter rankings by name.
    pub fn from_names<S: AsRef<str>>(names: &[S], rankings: &[Vec<S>]) -> Result<Self, ModelError> {
        let candidates = Candidates::new(names.iter().map(|s| s.as_ref().to_string()))?;
        let voters = rankings
            .iter()
            .map(|ranking| {
                let order = ranking
                    .iter()
                    .map(|name| candidates.lookup(name.as_ref()))
                    .collect::<Result<Vec<_>, _>>()?;
                Preference::new(order, candidates.len())
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(candidates, voters)
    }

    pub fn candidates(&self) -> &Candidates {
        &self.candidates
    }

    pub fn voters(&self) -> &[Preference] {
        &self.voters
    }

    pub fn voter(&self, i: usize) -> &Preference {
        &self.voters[i]
    }

    /// Number of voters `n`.
    pub fn n(&self) -> usize {
        self.voters.len()
    }

    /// Number of valid candidates `m`.
    pub fn m(&self) -> usize {
        self.candidates.len()
    }

    /// `b_i = top_i(C)` for every voter.
    pub fn truthful_ballots(&self) -> BallotProfile {
        BallotProfile::new(self.voters.iter().map(Preference::top).collect())
    }

    pub fn truthful_scores(&self) -> ScoreVector {
        ScoreVector::from_ballots(&self.truthful_ballots(), self.m())
    }

    /// Same profile with voters reordered: voter `i` of the result is voter
    /// `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        PreferenceProfile {
            candidates: self.candidates.clone(),
            voters: perm.iter().map(|&i| self.voters[i].clone()).collect(),
        }
    }
}
