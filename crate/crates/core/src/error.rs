use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("need at least one valid candidate")]
    NoCandidates,
    #[error("too many candidates: {0} (at most {max})", max = crate::MAX_CANDIDATES)]
    TooManyCandidates(usize),
    #[error("duplicate candidate name {0:?}")]
    DuplicateCandidate(String),
    #[error("unknown candidate {0:?}")]
    UnknownCandidate(String),
    #[error("ranking is not a permutation of the {expected} valid candidates")]
    NotAPermutation { expected: usize },
    #[error("profile has no voters")]
    NoVoters,
    #[error("voter {voter} ranks a different candidate set")]
    CandidateMismatch { voter: usize },
    #[error("threshold sigma={sigma} must satisfy n/2 < sigma <= n for n={n}")]
    InvalidThreshold { sigma: u32, n: u32 },
    #[error("unanimity requires sigma = n (got sigma={sigma}, n={n})")]
    UnanimityThreshold { sigma: u32, n: u32 },
    #[error("run is already resolved; no step can be taken")]
    AlreadyResolved,
    #[error("ballot profile has {got} voters, expected {expected}")]
    BallotCount { got: usize, expected: usize },
}
