use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ModelError;

/// Upper bound on the number of valid candidates (bitset width of [`WinnerSet`]).
pub const MAX_CANDIDATES: usize = 64;

/// Index of a valid candidate in `C⁺`. The default alternative ψ is not a
/// `Candidate`; it only shows up as [`Outcome::Default`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Candidate(pub u16);

impl Candidate {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for Candidate {
    fn from(i: usize) -> Self {
        Candidate(i as u16)
    }
}

/// Final (or resolved) result of a run: a valid winner or the default ψ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Winner(Candidate),
    Default,
}

impl Outcome {
    pub fn winner(self) -> Option<Candidate> {
        match self {
            Outcome::Winner(c) => Some(c),
            Outcome::Default => None,
        }
    }

    pub fn is_default(self) -> bool {
        matches!(self, Outcome::Default)
    }
}

/// The named candidate set `C = C⁺ ∪ {ψ}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidates {
    names: Vec<String>,
    default_name: String,
}

impl Candidates {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, ModelError> {
        Self::with_default(names, "ψ")
    }

    pub fn with_default<S: Into<String>>(
        names: impl IntoIterator<Item = S>,
        default_name: impl Into<String>,
    ) -> Result<Self, ModelError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let default_name = default_name.into();
        if names.is_empty() {
            return Err(ModelError::NoCandidates);
        }
        if names.len() > MAX_CANDIDATES {
            return Err(ModelError::TooManyCandidates(names.len()));
        }
        let mut seen = HashSet::new();
        for name in names.iter().chain(std::iter::once(&default_name)) {
            if !seen.insert(name.as_str()) {
                return Err(ModelError::DuplicateCandidate(name.clone()));
            }
        }
        Ok(Candidates {
            names,
            default_name,
        })
    }

    /// Candidates named `c1..cm`.
    pub fn numbered(m: usize) -> Result<Self, ModelError> {
        Self::new((1..=m).map(|i| format!("c{i}")))
    }

    /// `m = |C⁺|`.
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Candidate> + '_ {
        (0..self.names.len()).map(Candidate::from)
    }

    pub fn name(&self, c: Candidate) -> &str {
        &self.names[c.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn default_name(&self) -> &str {
        &self.default_name
    }

    pub fn outcome_name(&self, outcome: Outcome) -> &str {
        match outcome {
            Outcome::Winner(c) => self.name(c),
            Outcome::Default => &self.default_name,
        }
    }

    pub fn lookup(&self, name: &str) -> Result<Candidate, ModelError> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(Candidate::from)
            .ok_or_else(|| ModelError::UnknownCandidate(name.to_string()))
    }

    pub fn contains(&self, c: Candidate) -> bool {
        c.index() < self.names.len()
    }

    pub fn format_set(&self, set: WinnerSet) -> String {
        let inner: Vec<&str> = set.iter().map(|c| self.name(c)).collect();
        format!("{{{}}}", inner.join(","))
    }
}

/// A subset of `C⁺` (possible winners, reachable winners, ...).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WinnerSet(u64);

impl WinnerSet {
    pub const EMPTY: WinnerSet = WinnerSet(0);

    pub fn singleton(c: Candidate) -> Self {
        WinnerSet(1u64 << c.0)
    }

    pub fn from_bits(bits: u64) -> Self {
        WinnerSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn insert(&mut self, c: Candidate) {
        self.0 |= 1u64 << c.0;
    }

    pub fn contains(self, c: Candidate) -> bool {
        self.0 & (1u64 << c.0) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: WinnerSet) -> WinnerSet {
        WinnerSet(self.0 | other.0)
    }

    pub fn is_subset(self, other: WinnerSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// The single member, if the set has exactly one.
    pub fn sole(self) -> Option<Candidate> {
        (self.len() == 1).then(|| Candidate(self.0.trailing_zeros() as u16))
    }

    pub fn iter(self) -> impl Iterator<Item = Candidate> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros();
            bits &= bits - 1;
            Some(Candidate(i as u16))
        })
    }
}

impl FromIterator<Candidate> for WinnerSet {
    fn from_iter<I: IntoIterator<Item = Candidate>>(iter: I) -> Self {
        let mut set = WinnerSet::EMPTY;
        for c in iter {
            set.insert(c);
        }
        set
    }
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}
