use std::collections::BTreeMap;
use std::str::FromStr;

use clap::Args;
use cud_oracle::{run_suite, Budget, Grid, Suite, SuiteOptions, Tally};
use serde::Serialize;

use crate::{stdout, to_json, write_file, CliError, Context, Format};

/// `N,M,T`: exhaustive grid over `n ≤ N` voters, `m ≤ M` candidates and
/// deadlines `τ ≤ T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec(pub Grid);

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [n, m, t] = parts.as_slice() else {
            return Err(format!("expected N,M,T, got {s:?}"));
        };
        let num = |x: &str| x.parse::<usize>().map_err(|e| format!("{x:?}: {e}"));
        Ok(GridSpec(Grid {
            max_n: num(n)?,
            max_m: num(m)?,
            max_tau: num(t)? as u32,
        }))
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Suites to run (repeatable); all four by default.
    #[arg(long, value_parser = Suite::from_str)]
    pub suite: Vec<Suite>,
    /// Exhaustive grid `N,M,T`; must fit the oracle limits.
    #[arg(long, value_name = "N,M,T", default_value = "4,3,4")]
    pub budget: GridSpec,
    /// Seeded random traces for the lemma suite.
    #[arg(long, default_value_t = 10_000)]
    pub runs: usize,
    /// Seeded random instances for the theorem suite.
    #[arg(long, default_value_t = 1_000)]
    pub instances: usize,
    /// Largest odd n for the tightness constructions.
    #[arg(long, default_value_t = 9)]
    pub tight_max_n: usize,
}

#[derive(Debug, Serialize)]
struct SuiteSummary {
    suite: Suite,
    total: Tally,
    by_check: BTreeMap<String, Tally>,
}

fn check_budget(args: &VerifyArgs) -> Result<Budget, CliError> {
    let limits = Budget::default();
    let g = args.budget.0;
    let over = |what: &str, got: usize, limit: usize| {
        (got > limit).then(|| {
            CliError::invalid(format!(
                "budget exceeded: {what} = {got} is above the oracle limit {limit}"
            ))
        })
    };
    if let Some(e) = over("voters", g.max_n, limits.max_voters)
        .or_else(|| over("candidates", g.max_m, limits.max_candidates))
        .or_else(|| over("tau", g.max_tau as usize, limits.max_tau as usize))
        .or_else(|| over("tightness voters", args.tight_max_n, 11))
    {
        return Err(e);
    }
    Ok(limits)
}

pub(crate) fn verify(ctx: &Context, args: VerifyArgs) -> Result<(), CliError> {
    let budget = check_budget(&args)?;
    let suites = if args.suite.is_empty() {
        Suite::ALL.to_vec()
    } else {
        args.suite.clone()
    };
    let opts = SuiteOptions {
        seed: ctx.seed,
        budget,
        grid: args.budget.0,
        random_runs: args.runs,
        random_instances: args.instances,
        tight_max_n: args.tight_max_n,
        ..SuiteOptions::default()
    };
    let mut summaries = Vec::new();
    let mut lines = String::new();
    let mut failures = Vec::new();
    for suite in suites {
        tracing::info!(?suite, "running");
        let report = run_suite(suite, &opts)?;
        for r in &report.reports {
            lines.push_str(&r.to_json_line());
            lines.push('\n');
        }
        failures.extend(
            report
                .failures()
                .take(5)
                .map(|r| format!("{} {}: {}", r.check, r.instance, r.witness)),
        );
        summaries.push(SuiteSummary {
            suite,
            total: report.tally(),
            by_check: report.by_check(),
        });
    }
    // Full line-delimited reports go to --out; stdout gets the summary.
    if let Some(path) = &ctx.out {
        write_file(path, &lines)?;
    }
    let text = match ctx.format {
        Format::Json => to_json(&summaries),
        Format::Text => {
            let mut out = String::new();
            for s in &summaries {
                out.push_str(&format!(
                    "{:?}: {} pass, {} fail, {} skipped\n",
                    s.suite,
                    s.total.pass,
                    s.total.fail,
                    s.total.skip + s.total.not_applicable
                ));
                for (check, t) in &s.by_check {
                    out.push_str(&format!(
                        "  {check:<22} {:>7} pass {:>5} fail {:>7} skipped\n",
                        t.pass,
                        t.fail,
                        t.skip + t.not_applicable
                    ));
                }
            }
            out
        }
    };
    stdout(&text)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Invariant(failures.join("; ")))
    }
}
