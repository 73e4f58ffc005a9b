//! Batches of checks over exhaustive grids and seeded random instances.

use std::collections::BTreeMap;

use cud_core::{
    derive_seed, protocol_rng, run_protocol, AgentKind, PreferenceProfile, RuleConfig, StopRule,
};
use serde::{Deserialize, Serialize};

use crate::{
    all_profiles, bound_report, check_corollary1, check_corollary1_trace, check_theorem2,
    check_theorem2_trace, check_theorem3, check_trace, condorcet_counterexample, enumerate,
    enumerate_with, exact_poa, gen_tightness_profile, instance_hash, random_profile, random_rule,
    Budget, CheckResult, LemmaChecker, OracleError, ReachableOutcome, Report, Tally, TightCase,
    Verdict,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Lemmas,
    Theorems,
    Tightness,
    Condorcet,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::Lemmas,
        Suite::Theorems,
        Suite::Tightness,
        Suite::Condorcet,
    ];
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lemmas" => Ok(Suite::Lemmas),
            "theorems" => Ok(Suite::Theorems),
            "tightness" => Ok(Suite::Tightness),
            "condorcet" => Ok(Suite::Condorcet),
            other => Err(format!(
                "unknown suite {other:?} (lemmas|theorems|tightness|condorcet)"
            )),
        }
    }
}

/// Exhaustive grid: every profile with `n ≤ max_n`, `m ≤ max_m`, every valid
/// `σ`, every `τ ≤ max_tau`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub max_n: usize,
    pub max_m: usize,
    pub max_tau: u32,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            max_n: 4,
            max_m: 3,
            max_tau: 4,
        }
    }
}

impl Grid {
    pub fn instances(&self) -> impl Iterator<Item = (PreferenceProfile, RuleConfig)> + '_ {
        (1..=self.max_n).flat_map(move |n| {
            (1..=self.max_m).flat_map(move |m| {
                all_profiles(n, m).flat_map(move |profile| {
                    let rules: Vec<RuleConfig> = (n as u32 / 2 + 1..=n as u32)
                        .flat_map(|sigma| {
                            (0..=self.max_tau)
                                .map(move |tau| RuleConfig::majority(n, sigma, tau).unwrap())
                        })
                        .collect();
                    rules.into_iter().map(move |r| (profile.clone(), r))
                })
            })
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub seed: u64,
    pub budget: Budget,
    pub grid: Grid,
    /// Seeded engine runs checked along their whole trace.
    pub random_runs: usize,
    /// Larger random instances checked on the engine side only.
    pub random_instances: usize,
    pub random_max_n: usize,
    pub random_max_m: usize,
    pub random_max_tau: u32,
    /// Largest odd `n` used for tightness constructions.
    pub tight_max_n: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: 0,
            budget: Budget::default(),
            grid: Grid::default(),
            random_runs: 10_000,
            random_instances: 1_000,
            random_max_n: 10,
            random_max_m: 5,
            random_max_tau: 12,
            tight_max_n: 9,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub reports: Vec<Report>,
}

impl SuiteReport {
    pub fn tally(&self) -> Tally {
        Tally::of(&self.reports)
    }

    /// Pass/fail/skip counts broken down by check name.
    pub fn by_check(&self) -> BTreeMap<String, Tally> {
        let mut out: BTreeMap<String, Vec<&Report>> = BTreeMap::new();
        for r in &self.reports {
            out.entry(r.check.clone()).or_default().push(r);
        }
        out.into_iter().map(|(k, v)| (k, Tally::of(v))).collect()
    }

    pub fn failures(&self) -> impl Iterator<Item = &Report> {
        self.reports.iter().filter(|r| r.verdict == Verdict::Fail)
    }

    pub fn ok(&self) -> bool {
        self.tally().fail == 0
    }
}

pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Result<SuiteReport, OracleError> {
    let reports = match suite {
        Suite::Lemmas => lemma_suite(opts)?,
        Suite::Theorems => theorem_suite(opts)?,
        Suite::Tightness => tightness_suite(opts)?,
        Suite::Condorcet => condorcet_suite(opts)?,
    };
    Ok(SuiteReport { suite, reports })
}

fn lemma_result(checker: &LemmaChecker) -> CheckResult {
    match checker.violations.first() {
        None => CheckResult::new(
            Verdict::Pass,
            format!("{} states, {} edges", checker.states, checker.edges),
        ),
        Some(v) => CheckResult::new(
            Verdict::Fail,
            format!("{} at t={}: {}", v.lemma, v.t, v.detail),
        ),
    }
}

pub fn lemma_suite(opts: &SuiteOptions) -> Result<Vec<Report>, OracleError> {
    let mut out = Vec::new();
    for (profile, rule) in opts.grid.instances() {
        for kind in AgentKind::ALL {
            let (_, checker) =
                enumerate_with(&profile, rule, kind, &opts.budget, LemmaChecker::default())?;
            let id = instance_hash(&profile, &rule, Some(kind));
            out.push(Report::new(
                &id,
                "lemmas_all_branches",
                lemma_result(&checker),
            ));
        }
    }
    let mut rng = protocol_rng(derive_seed(opts.seed, &[b"lemmas"]));
    for run in 0..opts.random_runs {
        let n = rand::Rng::random_range(&mut rng, 1..=opts.random_max_n);
        let m = rand::Rng::random_range(&mut rng, 1..=opts.random_max_m);
        let profile = random_profile(&mut rng, n, m);
        let rule = random_rule(&mut rng, n, opts.random_max_tau);
        let kind = AgentKind::ALL[run % 2];
        let seed = derive_seed(opts.seed, &[b"lemmas-run", &(run as u64).to_le_bytes()]);
        let trace = run_protocol(&profile, rule, kind, seed);
        let violations = check_trace(&trace);
        let result = match violations.first() {
            None => CheckResult::new(Verdict::Pass, format!("{} steps", trace.steps.len())),
            Some(v) => CheckResult::new(
                Verdict::Fail,
                format!("seed {seed}: {} at t={}: {}", v.lemma, v.t, v.detail),
            ),
        };
        let id = instance_hash(&profile, &rule, Some(kind));
        out.push(Report::new(&id, "lemmas_seeded_trace", result));
    }
    Ok(out)
}

fn same_reach(a: &ReachableOutcome, b: &ReachableOutcome) -> bool {
    a.winners == b.winners && a.default_reachable == b.default_reachable
}

pub fn theorem_suite(opts: &SuiteOptions) -> Result<Vec<Report>, OracleError> {
    let mut out = Vec::new();
    for (profile, rule) in opts.grid.instances() {
        let mut per_kind = Vec::new();
        for kind in AgentKind::ALL {
            let id = instance_hash(&profile, &rule, Some(kind));
            let reach = enumerate(&profile, rule, kind, &opts.budget)?;
            out.push(Report::new(
                &id,
                "corollary1",
                check_corollary1(&profile, &rule, &reach),
            ));
            out.push(Report::new(
                &id,
                "theorem2",
                check_theorem2(&profile, &rule, &reach),
            ));
            let bound = bound_report(&profile, &rule, &reach)?;
            out.push(Report::new(&id, "theorem3", check_theorem3(&bound)));

            let reversed: Vec<usize> = (0..profile.n()).rev().collect();
            let permuted = profile.permuted(&reversed);
            let other = enumerate(&permuted, rule, kind, &opts.budget)?;
            out.push(Report::new(
                &id,
                "anonymity",
                CheckResult::pass_if(
                    same_reach(&reach, &other)
                        && exact_poa(&profile, &reach) == exact_poa(&permuted, &other),
                    format!("Ĉ {:?} vs {:?}", reach.winners, other.winners),
                ),
            ));

            let single = enumerate(
                &profile,
                rule.with_stop(StopRule::Singleton),
                kind,
                &opts.budget,
            )?;
            out.push(Report::new(
                &id,
                "stop_rules_agree",
                CheckResult::pass_if(
                    same_reach(&reach, &single),
                    format!(
                        "consensus {:?} vs singleton {:?}",
                        reach.winners, single.winners
                    ),
                ),
            ));

            let seed = derive_seed(opts.seed, &[id.as_bytes()]);
            let trace = run_protocol(&profile, rule, kind, seed);
            out.push(Report::new(
                &id,
                "engine_in_oracle",
                CheckResult::pass_if(
                    reach.contains(trace.winner),
                    format!("seed {seed} gave {:?}", trace.winner),
                ),
            ));
            per_kind.push(reach);
        }
        let id = instance_hash(&profile, &rule, None);
        out.push(Report::new(
            &id,
            "kinds_agree",
            CheckResult::pass_if(
                same_reach(&per_kind[0], &per_kind[1]),
                format!(
                    "lazy {:?} vs proactive {:?}",
                    per_kind[0].winners, per_kind[1].winners
                ),
            ),
        ));
    }

    let mut rng = protocol_rng(derive_seed(opts.seed, &[b"theorems"]));
    for run in 0..opts.random_instances {
        let n = rand::Rng::random_range(&mut rng, 1..=opts.random_max_n);
        let m = rand::Rng::random_range(&mut rng, 1..=opts.random_max_m);
        let profile = random_profile(&mut rng, n, m);
        let rule = random_rule(&mut rng, n, opts.random_max_tau);
        let kind = AgentKind::ALL[run % 2];
        let seed = derive_seed(opts.seed, &[b"theorems-run", &(run as u64).to_le_bytes()]);
        let trace = run_protocol(&profile, rule, kind, seed);
        let id = instance_hash(&profile, &rule, Some(kind));
        out.push(Report::new(
            &id,
            "corollary1_sampled",
            check_corollary1_trace(&trace),
        ));
        out.push(Report::new(
            &id,
            "theorem2_sampled",
            check_theorem2_trace(&trace),
        ));
    }
    Ok(out)
}

/// Every feasible `(case, n, σ, τ)` with odd `n ≤ max_n` and `τ ≤ max_tau`.
pub fn tightness_parameters(max_n: usize, max_tau: u32) -> Vec<(TightCase, usize, u32, u32)> {
    let mut out = Vec::new();
    for n in (3..=max_n).step_by(2) {
        for sigma in n as u32 / 2 + 1..=n as u32 {
            for tau in 0..=max_tau {
                for case in [TightCase::Two, TightCase::Three] {
                    if gen_tightness_profile(case, n, sigma, tau).is_ok() {
                        out.push((case, n, sigma, tau));
                    }
                }
            }
        }
    }
    out
}

pub fn tightness_suite(opts: &SuiteOptions) -> Result<Vec<Report>, OracleError> {
    let budget = Budget {
        max_voters: opts.budget.max_voters.max(opts.tight_max_n),
        max_candidates: opts.budget.max_candidates.max(opts.tight_max_n / 2 + 2),
        ..opts.budget
    };
    let mut out = Vec::new();
    for (case, n, sigma, tau) in tightness_parameters(opts.tight_max_n, opts.budget.max_tau) {
        let gen = gen_tightness_profile(case, n, sigma, tau)?;
        for kind in AgentKind::ALL {
            let id = instance_hash(&gen.profile, &gen.rule, Some(kind));
            let reach = enumerate(&gen.profile, gen.rule, kind, &budget)?;
            let report = bound_report(&gen.profile, &gen.rule, &reach)?;
            let check = match case {
                TightCase::Two => "tight_case2",
                TightCase::Three => "tight_case3",
            };
            out.push(Report::new(
                &id,
                check,
                CheckResult::pass_if(
                    report.tight,
                    format!(
                        "n={n} σ={sigma} τ={tau} blocks {:?}: PoA⁺ {:?} vs bound {} (case {}), Ĉ = {}",
                        gen.blocks,
                        report.observed_poa,
                        report.bound,
                        report.case,
                        gen.profile.candidates().format_set(reach.winners)
                    ),
                ),
            ));
        }
    }
    Ok(out)
}

pub fn condorcet_suite(opts: &SuiteOptions) -> Result<Vec<Report>, OracleError> {
    let mut out = Vec::new();
    for n in [3usize, 6] {
        for m in 4..=opts.budget.max_candidates.max(4) {
            let (profile, c) = condorcet_counterexample(n, m)?;
            for sigma in n as u32 / 2 + 1..=n as u32 {
                for tau in 0..=opts.budget.max_tau {
                    let rule = RuleConfig::majority(n, sigma, tau)?;
                    for kind in AgentKind::ALL {
                        let id = instance_hash(&profile, &rule, Some(kind));
                        let reach = enumerate(&profile, rule, kind, &opts.budget)?;
                        out.push(Report::new(
                            &id,
                            "condorcet_loser",
                            CheckResult::pass_if(
                                !reach.winners.contains(c),
                                format!(
                                    "n={n} m={m} σ={sigma} τ={tau}: Ĉ = {}",
                                    profile.candidates().format_set(reach.winners)
                                ),
                            ),
                        ));
                    }
                }
            }
        }
    }
    Ok(out)
}
