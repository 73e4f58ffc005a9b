use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use cud_core::AgentKind;
use cud_experiments::{
    aggregate, append_settings, change_summary, compare_kinds, convergence_table, run_sweep_with,
    settings_writer, write_aggregate, AggregateRow, ExperimentConfig, SettingResult,
};
use cud_oracle::theorem3_bound;

use crate::{stdout, to_json, write_file, CliError, Context, Format};

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Sweep config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Override `runs_per_setting`.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Override `preference_sets`.
    #[arg(long)]
    pub sets: Option<usize>,
}

/// Checks that must hold for any sweep; returns one message per violation.
pub fn sweep_violations(settings: &[SettingResult]) -> Vec<String> {
    let mut out = Vec::new();
    let mut by_tau: BTreeMap<(String, usize, usize, u8), Vec<&SettingResult>> = BTreeMap::new();
    for s in settings {
        let at = format!(
            "{} n={} τ={} {} set {}",
            s.dataset,
            s.n,
            s.tau,
            s.kind.as_str(),
            s.set
        );
        if s.max_changes > s.tau {
            out.push(format!(
                "{at}: {} changes in {} steps",
                s.max_changes, s.tau
            ));
        }
        if let (Some(poa), Ok(b)) = (s.sampled_poa, theorem3_bound(s.n, s.sigma, s.tau)) {
            if poa > b.bound {
                out.push(format!("{at}: sampled PoA⁺ {poa} above bound {}", b.bound));
            }
        }
        let kind = matches!(s.kind, AgentKind::Proactive) as u8;
        by_tau
            .entry((s.dataset.clone(), s.n, s.set, kind))
            .or_default()
            .push(s);
    }
    for group in by_tau.values_mut() {
        group.sort_by_key(|s| s.tau);
        for w in group.windows(2) {
            if w[1].converged < w[0].converged {
                out.push(format!(
                    "{} n={} {} set {}: {} runs converged at τ={} but {} at τ={}",
                    w[0].dataset,
                    w[0].n,
                    w[0].kind.as_str(),
                    w[0].set,
                    w[0].converged,
                    w[0].tau,
                    w[1].converged,
                    w[1].tau
                ));
            }
        }
    }
    out
}

fn opt(x: Option<f64>) -> String {
    x.map_or("-".into(), |v| format!("{v:.2}"))
}

/// Human-readable tables of a finished sweep.
pub fn summary(
    config: &ExperimentConfig,
    settings: &[SettingResult],
    rows: &[AggregateRow],
) -> String {
    let mut out = format!(
        "sweep {}: {} settings, {} preference sets × {} runs, master seed {}, {:?} stop\n\n",
        config.name,
        settings.len(),
        config.preference_sets,
        config.runs_per_setting,
        config.master_seed,
        config.stop
    );
    out.push_str("smallest τ from which every run converged\n");
    for (d, n, k, t) in convergence_table(settings) {
        out.push_str(&format!(
            "  {d:<12} n={n:<3} {:<9} {}\n",
            k.as_str(),
            t.map_or("none".into(), |t| t.to_string())
        ));
    }
    out.push_str("\nvote changes per converged run (mean ± std over sets and τ)\n");
    for c in change_summary(settings) {
        out.push_str(&format!(
            "  {:<12} n={:<3} {:<9} {:.2} ± {:.2}\n",
            c.dataset,
            c.n,
            c.kind.as_str(),
            c.mean,
            c.std
        ));
    }
    out.push_str(
        "\nper τ: converged fraction, mean changes, sampled PoA⁺ (mean ± std over sets)\n",
    );
    for r in rows {
        out.push_str(&format!(
            "  {:<12} n={:<3} {:<9} τ={:<3} conv {:.4}  changes {:.2}  PoA⁺ {} ± {}\n",
            r.dataset,
            r.n,
            r.kind.as_str(),
            r.tau,
            r.converged_fraction,
            r.mean_changes,
            opt(r.poa_mean),
            opt(r.poa_std)
        ));
    }
    let cmp = compare_kinds(settings);
    if !cmp.pairs.is_empty() {
        let total = cmp.pairs.len();
        out.push_str(&format!(
            "\nlazy vs proactive over {total} paired settings\n  convergence counts differ in {}\n  sampled PoA⁺ differs in {}\n  proactive made fewer changes in {}\n  mean change difference (proactive − lazy) {:.3}\n",
            cmp.convergence_mismatches, cmp.poa_mismatches, cmp.unordered_pairs, cmp.mean_delta
        ));
        for p in cmp
            .pairs
            .iter()
            .filter(|p| p.lazy_poa != p.proactive_poa)
            .take(10)
        {
            out.push_str(&format!(
                "  PoA⁺ differs: {} n={} τ={} set {}: lazy {:?} proactive {:?}\n",
                p.dataset, p.n, p.tau, p.set, p.lazy_poa, p.proactive_poa
            ));
        }
    }
    out
}

pub(crate) fn experiment(ctx: &Context, args: ExperimentArgs) -> Result<(), CliError> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(r) = args.runs {
        config.runs_per_setting = r;
    }
    if let Some(s) = args.sets {
        config.preference_sets = s;
    }
    if ctx.seed_given {
        config.master_seed = ctx.seed;
    }
    config.validate()?;
    let dir = ctx
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("results").join(&config.name));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let base = args.config.parent().map(|p| p.to_path_buf());

    let settings_path = dir.join("settings.csv");
    let mut writer = settings_writer(&settings_path)?;
    let result = run_sweep_with(&config, base.as_deref(), |group| {
        tracing::info!(
            dataset = group[0].dataset,
            n = group[0].n,
            settings = group.len(),
            "finished block"
        );
        append_settings(&mut writer, group)
    })?;
    let rows = aggregate(&result.settings);
    write_aggregate(&dir.join("aggregate.csv"), &rows)?;
    let text = summary(&config, &result.settings, &rows);
    write_file(&dir.join("summary.txt"), &text)?;
    match ctx.format {
        Format::Text => stdout(&text)?,
        Format::Json => stdout(&to_json(&serde_json::json!({
            "config": config,
            "aggregate": rows,
            "kinds": compare_kinds(&result.settings),
        })))?,
    }
    let violations = sweep_violations(&result.settings);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Invariant(violations.join("; ")))
    }
}
