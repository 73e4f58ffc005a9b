use std::collections::VecDeque;

use clap::{Args, ValueEnum};
use cud_core::{
    derive_seed, mdvr, run_protocol, run_with_picker, AgentKind, GameTrace, HandRaise, Picker,
    PreferenceProfile, RuleConfig, ScoreVector, StepRecord, StopRule,
};
use cud_oracle::{
    bound_report, check_corollary1, check_theorem2, check_theorem3, check_trace, enumerate, Budget,
    Verdict,
};
use serde::Serialize;

use crate::profile::ProfileSource;
use crate::{to_json, CliError, Context, Format};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Stop {
    /// Play on until some candidate holds σ ballots or Ŵ is empty.
    Consensus,
    /// Stop as soon as Ŵ is a single candidate or empty.
    Singleton,
}

impl From<Stop> for StopRule {
    fn from(s: Stop) -> Self {
        match s {
            Stop::Consensus => StopRule::Consensus,
            Stop::Singleton => StopRule::Singleton,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RuleArgs {
    /// Threshold; defaults to n (unanimity).
    #[arg(long)]
    pub sigma: Option<u32>,
    /// Deadline: number of steps.
    #[arg(long)]
    pub tau: u32,
    #[arg(long, value_enum, default_value_t = Stop::Consensus)]
    pub stop: Stop,
}

impl RuleArgs {
    fn rule(&self, n: usize) -> Result<RuleConfig, CliError> {
        let sigma = self.sigma.unwrap_or(n as u32);
        Ok(RuleConfig::majority(n, sigma, self.tau)?.with_stop(self.stop.into()))
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: ProfileSource,
    #[command(flatten)]
    pub rule: RuleArgs,
    #[arg(long, default_value = "lazy")]
    pub kind: AgentKind,
    /// Force the picked voters (1-based, comma separated) instead of
    /// drawing them.
    #[arg(long, value_delimiter = ',')]
    pub picks: Option<Vec<usize>>,
}

/// Scripted picks that report a bad script instead of panicking.
struct Forced {
    script: VecDeque<usize>,
    error: Option<String>,
}

impl Picker for Forced {
    fn pick(&mut self, hand_raisers: &[HandRaise]) -> usize {
        let Some(v) = self.script.pop_front() else {
            self.error.get_or_insert_with(|| "ran out of picks".into());
            return 0;
        };
        hand_raisers
            .iter()
            .position(|h| h.voter == v)
            .unwrap_or_else(|| {
                self.error
                    .get_or_insert_with(|| format!("{} did not raise a hand", voter(v)));
                0
            })
    }
}

fn voter(i: usize) -> String {
    format!("v{}", i + 1)
}

fn scores(s: &ScoreVector) -> String {
    let parts: Vec<String> = s.as_slice().iter().map(u32::to_string).collect();
    format!("({})", parts.join(","))
}

/// The per-step table: remaining time, tallies, possible winners,
/// hand-raisers with their desired ballots, the picked voter and the change.
pub fn render_steps(trace: &GameTrace) -> String {
    let names = trace.profile.candidates();
    let mut rows = vec![[
        "t".to_string(),
        "scores".into(),
        "Ŵ".into(),
        "hand-raisers".into(),
        "picked".into(),
        "change".into(),
    ]];
    let possible = |s: &ScoreVector, t: u32| {
        let view = mdvr(s, t, &trace.rule);
        if view.possible.is_empty() {
            format!("{{{}}}", names.default_name())
        } else {
            names.format_set(view.possible)
        }
    };
    for StepRecord {
        t,
        scores_before,
        hand_raisers,
        picked,
        change,
    } in &trace.steps
    {
        let raisers: Vec<String> = hand_raisers
            .iter()
            .map(|h| format!("{}→{}", voter(h.voter), names.name(h.desired)))
            .collect();
        rows.push([
            t.to_string(),
            scores(scores_before),
            possible(scores_before, *t),
            if raisers.is_empty() {
                "-".into()
            } else {
                raisers.join(" ")
            },
            picked.map_or("-".into(), voter),
            change.map_or("-".into(), |c| {
                format!("{}→{}", names.name(c.from), names.name(c.to))
            }),
        ]);
    }
    rows.push([
        trace.stop_time.to_string(),
        scores(&trace.final_scores),
        possible(&trace.final_scores, trace.stop_time),
        String::new(),
        String::new(),
        String::new(),
    ]);
    let widths: Vec<usize> = (0..6)
        .map(|k| rows.iter().map(|r| r[k].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        out.push_str(cells.join(" | ").trim_end());
        out.push('\n');
    }
    out.push_str(&format!(
        "winner: {} (stopped at t={}, {} vote changes)\n",
        names.outcome_name(trace.winner),
        trace.stop_time,
        trace.vote_changes()
    ));
    out
}

fn profile_summary(profile: &PreferenceProfile) -> String {
    let names = profile.candidates();
    let mut out = String::new();
    for (i, p) in profile.voters().iter().enumerate() {
        let order: Vec<&str> = p.order().iter().map(|&c| names.name(c)).collect();
        out.push_str(&format!("{}: {}\n", voter(i), order.join(" > ")));
    }
    out
}

pub(crate) fn simulate(ctx: &Context, args: SimulateArgs) -> Result<(), CliError> {
    let profile = args.source.load(ctx.seed)?;
    let rule = args.rule.rule(profile.n())?;
    if let Some(picks) = &args.picks {
        if let Some(&bad) = picks.iter().find(|&&v| v == 0 || v > profile.n()) {
            return Err(CliError::invalid(format!(
                "--picks: voter {bad} is not in 1..={}",
                profile.n()
            )));
        }
    }
    let trace = match &args.picks {
        Some(picks) => {
            let mut forced = Forced {
                script: picks.iter().map(|v| v - 1).collect(),
                error: None,
            };
            let trace = run_with_picker(&profile, rule, args.kind, &mut forced);
            if let Some(e) = forced.error {
                return Err(CliError::invalid(format!("--picks: {e}")));
            }
            trace
        }
        None => run_protocol(&profile, rule, args.kind, derive_seed(ctx.seed, &[b"run"])),
    };
    let text = match ctx.format {
        Format::Text => format!(
            "{}σ={} τ={} kind={}\n\n{}",
            profile_summary(&profile),
            rule.sigma,
            rule.tau,
            args.kind.as_str(),
            render_steps(&trace)
        ),
        Format::Json => to_json(&trace),
    };
    ctx.emit(&text)?;
    let violations = check_trace(&trace);
    match violations.first() {
        None => Ok(()),
        Some(v) => Err(CliError::Invariant(format!(
            "{} at t={}: {}",
            v.lemma, v.t, v.detail
        ))),
    }
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub source: ProfileSource,
    #[command(flatten)]
    pub rule: RuleArgs,
    /// Only this agent kind (default: both).
    #[arg(long)]
    pub kind: Option<AgentKind>,
    /// Largest number of distinct states to expand.
    #[arg(long, default_value_t = Budget::default().max_states)]
    pub max_states: usize,
}

#[derive(Debug, Serialize)]
struct OracleRow {
    kind: AgentKind,
    reachable_winners: Vec<String>,
    default_reachable: bool,
    branches: u128,
    states: usize,
    distribution: Vec<(String, f64)>,
    exact_poa: Option<u32>,
    bound_case: u8,
    bound: u32,
    corollary1: Verdict,
    theorem2: Verdict,
    theorem3: Verdict,
}

pub(crate) fn oracle(ctx: &Context, args: OracleArgs) -> Result<(), CliError> {
    let profile = args.source.load(ctx.seed)?;
    let rule = args.rule.rule(profile.n())?;
    let budget = Budget {
        max_states: args.max_states,
        ..Budget::default()
    };
    let names = profile.candidates();
    let kinds = args.kind.map_or(AgentKind::ALL.to_vec(), |k| vec![k]);
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for kind in kinds {
        let reach = enumerate(&profile, rule, kind, &budget)?;
        let bound = bound_report(&profile, &rule, &reach)?;
        let checks = [
            ("corollary 1", check_corollary1(&profile, &rule, &reach)),
            ("theorem 2", check_theorem2(&profile, &rule, &reach)),
            ("theorem 3", check_theorem3(&bound)),
        ];
        for (name, c) in &checks {
            if c.verdict == Verdict::Fail {
                failures.push(format!("{} {name}: {}", kind.as_str(), c.witness));
            }
        }
        let mut distribution: Vec<(String, f64)> = names
            .iter()
            .map(|c| (names.name(c).to_string(), reach.distribution[c.index()]))
            .collect();
        distribution.push((
            names.default_name().to_string(),
            *reach.distribution.last().unwrap_or(&0.0),
        ));
        rows.push(OracleRow {
            kind,
            reachable_winners: reach
                .winners
                .iter()
                .map(|c| names.name(c).to_string())
                .collect(),
            default_reachable: reach.default_reachable,
            branches: reach.branch_count,
            states: reach.states,
            distribution,
            exact_poa: bound.observed_poa,
            bound_case: bound.case,
            bound: bound.bound,
            corollary1: checks[0].1.verdict,
            theorem2: checks[1].1.verdict,
            theorem3: checks[2].1.verdict,
        });
    }
    let text = match ctx.format {
        Format::Json => to_json(&rows),
        Format::Text => {
            let mut out = format!(
                "{}σ={} τ={} truthful scores {}\n",
                profile_summary(&profile),
                rule.sigma,
                rule.tau,
                scores(&profile.truthful_scores())
            );
            for r in &rows {
                let dist: Vec<String> = r
                    .distribution
                    .iter()
                    .filter(|(_, p)| *p > 0.0)
                    .map(|(c, p)| format!("{c}:{p:.4}"))
                    .collect();
                out.push_str(&format!(
                    "\n[{}]\nreachable winners: {{{}}}{}\nbranches: {}  states: {}\ndistribution: {}\nPoA⁺: {}  bound: {} (case {})\nchecks: corollary 1 {}, theorem 2 {}, theorem 3 {}\n",
                    r.kind.as_str(),
                    r.reachable_winners.join(","),
                    if r.default_reachable { " + default" } else { "" },
                    r.branches,
                    r.states,
                    dist.join(" "),
                    r.exact_poa.map_or("n/a".into(), |p| p.to_string()),
                    r.bound,
                    r.bound_case,
                    r.corollary1,
                    r.theorem2,
                    r.theorem3,
                ));
            }
            out
        }
    };
    ctx.emit(&text)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Invariant(failures.join("; ")))
    }
}
