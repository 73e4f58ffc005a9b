use serde::{Deserialize, Serialize};

use crate::{Candidate, ModelError, Outcome, ScoreVector, WinnerSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuleVariant {
    /// Iterative majority with threshold `n/2 < σ ≤ n`.
    IMaj,
    /// Iterative unanimity, `σ = n`.
    IUn,
}

/// When a run stops before the deadline.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Stop once some candidate holds `σ` ballots, or once `Ŵ = ∅`.
    #[default]
    Consensus,
    /// Stop as soon as the MDVR output is a singleton (`Ŵ = {w}` or `{ψ}`).
    Singleton,
}

/// Threshold `σ`, deadline `τ`, rule variant and stop rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RuleConfig {
    pub sigma: u32,
    pub tau: u32,
    pub variant: RuleVariant,
    #[serde(default)]
    pub stop: StopRule,
}

impl RuleConfig {
    pub fn new(n: usize, variant: RuleVariant, sigma: u32, tau: u32) -> Result<Self, ModelError> {
        let rule = RuleConfig {
            sigma,
            tau,
            variant,
            stop: StopRule::Consensus,
        };
        rule.validate(n)?;
        Ok(rule)
    }

    pub fn majority(n: usize, sigma: u32, tau: u32) -> Result<Self, ModelError> {
        Self::new(n, RuleVariant::IMaj, sigma, tau)
    }

    pub fn unanimity(n: usize, tau: u32) -> Result<Self, ModelError> {
        Self::new(n, RuleVariant::IUn, n as u32, tau)
    }

    pub fn validate(&self, n: usize) -> Result<(), ModelError> {
        let n32 = n as u32;
        if 2 * self.sigma <= n32 || self.sigma > n32 {
            return Err(ModelError::InvalidThreshold {
                sigma: self.sigma,
                n: n32,
            });
        }
        if self.variant == RuleVariant::IUn && self.sigma != n32 {
            return Err(ModelError::UnanimityThreshold {
                sigma: self.sigma,
                n: n32,
            });
        }
        Ok(())
    }

    pub fn with_tau(self, tau: u32) -> Self {
        RuleConfig { tau, ..self }
    }

    pub fn with_stop(self, stop: StopRule) -> Self {
        RuleConfig { stop, ..self }
    }

    /// The final outcome if a run in this state is over, `None` otherwise.
    /// Both stop rules agree at `t = 0`.
    pub fn terminal(&self, scores: &ScoreVector, t: u32) -> Option<Outcome> {
        let view = mdvr(scores, t, self);
        match self.stop {
            StopRule::Singleton => view.resolved,
            StopRule::Consensus => {
                if view.possible.is_empty() {
                    Some(Outcome::Default)
                } else {
                    threshold_winner(scores, self).map(Outcome::Winner)
                }
            }
        }
    }

    /// True when candidate with score `s` can still reach `σ` with `t` steps left.
    #[inline]
    pub fn reachable(&self, score: u32, t: u32) -> bool {
        score + t >= self.sigma
    }
}

/// `Ŵ(s, t) = {c ∈ C⁺ : σ − s_c < t + 1}`.
pub fn possible_winners(scores: &ScoreVector, t: u32, rule: &RuleConfig) -> WinnerSet {
    scores
        .iter()
        .filter(|&(_, s)| rule.reachable(s, t))
        .map(|(c, _)| c)
        .collect()
}

/// What the MDVR says about a score vector at `t` steps before the deadline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeView {
    pub possible: WinnerSet,
    pub resolved: Option<Outcome>,
}

impl OutcomeView {
    /// `top_i(F(s, t))`: the voter's best possible outcome, ψ when `Ŵ = ∅`.
    pub fn best_for(&self, pref: &crate::Preference) -> Outcome {
        match pref.top_of(self.possible) {
            Some(c) => Outcome::Winner(c),
            None => Outcome::Default,
        }
    }

    pub fn is_resolved(&self) -> bool {
        self.resolved.is_some()
    }
}

/// `F^IMaj_σ(s, t)` (and `F^IUn` when `σ = n`): `{ψ}` if no candidate can
/// reach the threshold, otherwise `Ŵ`. Resolved when the output is a singleton.
pub fn mdvr(scores: &ScoreVector, t: u32, rule: &RuleConfig) -> OutcomeView {
    let possible = possible_winners(scores, t, rule);
    let resolved = if possible.is_empty() {
        Some(Outcome::Default)
    } else {
        possible.sole().map(Outcome::Winner)
    };
    OutcomeView { possible, resolved }
}

/// Only candidate able to be declared at `t = 0`; exists iff some `s_c ≥ σ`.
pub fn threshold_winner(scores: &ScoreVector, rule: &RuleConfig) -> Option<Candidate> {
    scores
        .iter()
        .find(|&(_, s)| s >= rule.sigma)
        .map(|(c, _)| c)
}
