//! Irrational ballot changes.
//!
//! A change to `c_j` is an opposing alignment (OA) when the voter prefers the
//! current tally leader to `c_j`; with tied leaders it must prefer every one
//! of them. It is an inappropriate alignment (IA) when some `c_k` the voter
//! prefers to `c_j` already holds strictly more ballots. One change can carry
//! both flags. Keeping the current ballot is never flagged.

use cud_core::{Candidate, Preference, ScoreVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Irrationality {
    #[serde(rename = "OA")]
    OpposingAlignment,
    #[serde(rename = "IA")]
    InappropriateAlignment,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrrationalityFlag {
    pub class: Irrationality,
    pub target: Candidate,
    /// The leader (OA) or the preferred stronger candidate (IA).
    pub evidence: Candidate,
    /// Tallies the voter saw when acting.
    pub scores: ScoreVector,
}

/// Flags for a change from `current` to `target` seen against `scores`.
pub fn classify_change(
    pref: &Preference,
    current: Candidate,
    target: Candidate,
    scores: &ScoreVector,
) -> Vec<IrrationalityFlag> {
    let mut flags = Vec::new();
    if target == current {
        return flags;
    }
    let flag = |class, evidence| IrrationalityFlag {
        class,
        target,
        evidence,
        scores: scores.clone(),
    };
    let top = scores.max();
    let leaders: Vec<Candidate> = scores
        .iter()
        .filter(|&(_, s)| s == top)
        .map(|(c, _)| c)
        .collect();
    if leaders.iter().all(|&l| pref.prefers(l, target)) {
        let least_liked = *leaders
            .iter()
            .max_by_key(|&&l| pref.rank(l))
            .expect("scores are never empty");
        flags.push(flag(Irrationality::OpposingAlignment, least_liked));
    }
    let stronger = pref
        .order()
        .iter()
        .take_while(|&&c| c != target)
        .find(|&&c| scores.get(c) > scores.get(target));
    if let Some(&c) = stronger {
        flags.push(flag(Irrationality::InappropriateAlignment, c));
    }
    flags
}
