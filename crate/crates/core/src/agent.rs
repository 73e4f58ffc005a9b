use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::{mdvr, Candidate, Outcome, Preference, RuleConfig, ScoreVector};

/// Which consistent utility class the (homogeneous) population follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    /// Cares only about the best reachable outcome.
    Lazy,
    /// Also prefers more support for that outcome when it is unchanged.
    Proactive,
}

impl AgentKind {
    pub const ALL: [AgentKind; 2] = [AgentKind::Lazy, AgentKind::Proactive];

    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::Lazy => "lazy",
            AgentKind::Proactive => "proactive",
        }
    }
}

impl std::str::FromStr for AgentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lazy" => Ok(AgentKind::Lazy),
            "proactive" => Ok(AgentKind::Proactive),
            other => Err(format!("unknown agent kind {other:?} (lazy|proactive)")),
        }
    }
}

/// How a voter sees a score vector at a given horizon: her best possible
/// outcome and, for proactive voters, that outcome's current support.
///
/// Utilities are never materialised as numbers; two appraisals are only ever
/// compared through [`Appraisal::compare`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Appraisal {
    pub best: Outcome,
    pub support: u32,
}

impl Appraisal {
    pub fn of(pref: &Preference, scores: &ScoreVector, t: u32, rule: &RuleConfig) -> Self {
        let best = mdvr(scores, t, rule).best_for(pref);
        let support = best.winner().map_or(0, |w| scores.get(w));
        Appraisal { best, support }
    }

    pub fn compare(&self, other: &Appraisal, kind: AgentKind, pref: &Preference) -> Ordering {
        match pref.compare(self.best, other.best) {
            Ordering::Equal => match (kind, self.best) {
                (AgentKind::Proactive, Outcome::Winner(_)) => self.support.cmp(&other.support),
                _ => Ordering::Equal,
            },
            unequal => unequal,
        }
    }
}

/// Utility comparison of `scores` against `other` at horizon `t`.
/// `Greater` means the voter strictly prefers `scores`.
pub fn compare_outcomes(
    kind: AgentKind,
    pref: &Preference,
    scores: &ScoreVector,
    other: &ScoreVector,
    t: u32,
    rule: &RuleConfig,
) -> Ordering {
    let a = Appraisal::of(pref, scores, t, rule);
    let b = Appraisal::of(pref, other, t, rule);
    a.compare(&b, kind, pref)
}

/// The ballot a voter would cast if picked at `t` steps before the deadline.
///
/// Every alternative is appraised at horizon `t − 1` on `s − b_i + c`. The
/// current ballot is kept unless some alternative is strictly better; among
/// the strictly better ones of maximal utility, the highest ranked wins.
pub fn best_response(
    kind: AgentKind,
    pref: &Preference,
    current: Candidate,
    scores: &ScoreVector,
    t: u32,
    rule: &RuleConfig,
) -> Candidate {
    assert!(t >= 1, "best response needs at least one remaining step");
    let horizon = t - 1;
    let keep = Appraisal::of(pref, scores, horizon, rule);

    let mut best: Option<(Candidate, Appraisal)> = None;
    // Iterating in preference order makes "first maximal" the a_i tie-break.
    for &c in pref.order() {
        if c == current {
            continue;
        }
        let value = Appraisal::of(pref, &scores.moved(current, c), horizon, rule);
        if value.compare(&keep, kind, pref) != Ordering::Greater {
            continue;
        }
        match &best {
            Some((_, incumbent)) if value.compare(incumbent, kind, pref) != Ordering::Greater => {}
            _ => best = Some((c, value)),
        }
    }
    best.map_or(current, |(c, _)| c)
}
