//! Finite-instance checkers for the convergence and price-of-anarchy results.

use std::fmt;

use cud_core::{Candidate, GameTrace, Outcome, PreferenceProfile, RuleConfig};
use serde::{Deserialize, Serialize};

use crate::{OracleError, ReachableOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Precondition of the checked statement does not hold here.
    Skip,
    NotApplicable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skip => "skip",
            Verdict::NotApplicable => "n/a",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub verdict: Verdict,
    pub witness: String,
}

impl CheckResult {
    pub fn new(verdict: Verdict, witness: impl Into<String>) -> Self {
        CheckResult {
            verdict,
            witness: witness.into(),
        }
    }

    pub fn pass_if(ok: bool, witness: impl Into<String>) -> Self {
        Self::new(if ok { Verdict::Pass } else { Verdict::Fail }, witness)
    }
}

/// `PoA⁺ = max_c sc_c(b) − min_{c ∈ Ĉ} sc_c(b)` on truthful ballots;
/// `None` when no valid candidate is reachable.
pub fn exact_poa(profile: &PreferenceProfile, reach: &ReachableOutcome) -> Option<u32> {
    let truthful = profile.truthful_scores();
    let worst = reach.winners.iter().map(|c| truthful.get(c)).min()?;
    Some(truthful.max() - worst)
}

/// `PoA⁺` estimated from winners actually observed in sampled runs.
pub fn sampled_poa<'a>(
    profile: &PreferenceProfile,
    winners: impl IntoIterator<Item = &'a Outcome>,
) -> Option<u32> {
    let truthful = profile.truthful_scores();
    let worst = winners
        .into_iter()
        .filter_map(|o| o.winner())
        .map(|c| truthful.get(c))
        .min()?;
    Some(truthful.max() - worst)
}

/// True when some truthful tally is at least `σ − τ`.
pub fn corollary1_predicts_convergence(profile: &PreferenceProfile, rule: &RuleConfig) -> bool {
    profile.truthful_scores().max() + rule.tau >= rule.sigma
}

/// The run converges on every branch iff some truthful tally is ≥ `σ − τ`,
/// and otherwise ends in ψ on every branch.
pub fn check_corollary1(
    profile: &PreferenceProfile,
    rule: &RuleConfig,
    reach: &ReachableOutcome,
) -> CheckResult {
    let predicted = corollary1_predicts_convergence(profile, rule);
    let ok = if predicted {
        !reach.default_reachable && !reach.winners.is_empty()
    } else {
        reach.default_reachable && reach.winners.is_empty()
    };
    CheckResult::pass_if(
        ok,
        format!(
            "max truthful {} vs σ−τ {}; default reachable {}, |Ĉ| {}",
            profile.truthful_scores().max(),
            rule.sigma as i64 - rule.tau as i64,
            reach.default_reachable,
            reach.winners.len()
        ),
    )
}

/// Engine-side version for instances too large to enumerate.
pub fn check_corollary1_trace(trace: &GameTrace) -> CheckResult {
    let predicted = corollary1_predicts_convergence(&trace.profile, &trace.rule);
    CheckResult::pass_if(
        predicted == trace.converged(),
        format!("predicted {predicted}, outcome {:?}", trace.winner),
    )
}

/// The candidate Theorem 2 guarantees, if the profile meets its premise:
/// truthful tally ≥ max(⌊n/2⌋ + 1, σ − τ).
pub fn theorem2_candidate(profile: &PreferenceProfile, rule: &RuleConfig) -> Option<Candidate> {
    let need = (profile.n() as u32 / 2 + 1).max(rule.sigma.saturating_sub(rule.tau));
    profile
        .truthful_scores()
        .iter()
        .find(|&(_, s)| s >= need)
        .map(|(c, _)| c)
}

pub fn check_theorem2(
    profile: &PreferenceProfile,
    rule: &RuleConfig,
    reach: &ReachableOutcome,
) -> CheckResult {
    match theorem2_candidate(profile, rule) {
        None => CheckResult::new(Verdict::Skip, "no candidate meets the premise"),
        Some(c) => CheckResult::pass_if(
            reach.winners.sole() == Some(c) && !reach.default_reachable,
            format!(
                "{} must win; Ĉ = {}, default reachable {}",
                profile.candidates().name(c),
                profile.candidates().format_set(reach.winners),
                reach.default_reachable
            ),
        ),
    }
}

pub fn check_theorem2_trace(trace: &GameTrace) -> CheckResult {
    match theorem2_candidate(&trace.profile, &trace.rule) {
        None => CheckResult::new(Verdict::Skip, "no candidate meets the premise"),
        Some(c) => CheckResult::pass_if(
            trace.winner == Outcome::Winner(c),
            format!("{c} must win, got {:?}", trace.winner),
        ),
    }
}

/// Which of the three deadline regimes `(n, σ, τ)` falls into, with its bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bound {
    pub case: u8,
    pub bound: u32,
}

pub fn theorem3_bound(n: usize, sigma: u32, tau: u32) -> Result<Bound, OracleError> {
    RuleConfig::majority(n, sigma, tau)?;
    let half = n as u32 / 2;
    Ok(if tau + half <= sigma {
        Bound { case: 1, bound: 0 }
    } else if tau < sigma {
        Bound {
            case: 2,
            bound: half + tau - sigma,
        }
    } else {
        // n = 1 would give −1; a single voter never has a gap.
        Bound {
            case: 3,
            bound: half.saturating_sub(1),
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub case: u8,
    pub bound: u32,
    pub observed_poa: Option<u32>,
    pub tight: bool,
}

impl BoundReport {
    pub fn holds(&self) -> bool {
        self.observed_poa.is_none_or(|p| p <= self.bound)
    }
}

pub fn bound_report(
    profile: &PreferenceProfile,
    rule: &RuleConfig,
    reach: &ReachableOutcome,
) -> Result<BoundReport, OracleError> {
    let Bound { case, bound } = theorem3_bound(profile.n(), rule.sigma, rule.tau)?;
    let observed_poa = exact_poa(profile, reach);
    Ok(BoundReport {
        case,
        bound,
        observed_poa,
        tight: observed_poa == Some(bound),
    })
}

pub fn check_theorem3(report: &BoundReport) -> CheckResult {
    match report.observed_poa {
        None => CheckResult::new(Verdict::NotApplicable, "Ĉ is empty"),
        Some(p) => CheckResult::pass_if(
            p <= report.bound,
            format!("case {}: PoA⁺ {p} vs bound {}", report.case, report.bound),
        ),
    }
}
