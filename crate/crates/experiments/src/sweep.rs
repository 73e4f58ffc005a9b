use std::path::Path;

use cud_core::{derive_seed, run_protocol, AgentKind, PreferenceProfile, WinnerSet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Dataset, ExperimentConfig, ExperimentError};

/// Aggregates of `runs_per_setting` runs on one preference set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingResult {
    pub dataset: String,
    pub n: usize,
    pub sigma: u32,
    pub tau: u32,
    pub kind: AgentKind,
    pub set: usize,
    pub runs: usize,
    pub converged: usize,
    pub converged_fraction: f64,
    /// Over all runs.
    pub mean_changes: f64,
    pub std_changes: f64,
    /// Over converged runs only; `None` if nothing converged.
    pub mean_changes_converged: Option<f64>,
    pub max_changes: u32,
    pub truthful_max: u32,
    /// Truthful plurality score minus the lowest truthful score among
    /// observed winners; `None` if nothing converged.
    pub sampled_poa: Option<u32>,
    /// Observed winners as a candidate bitmask.
    pub winners: u64,
}

/// Seed of the `set`-th preference set for `(dataset, n)`.
pub fn profile_seed(master: u64, dataset: &str, n: usize, set: usize) -> u64 {
    derive_seed(
        master,
        &[
            b"profile",
            dataset.as_bytes(),
            &(n as u64).to_le_bytes(),
            &(set as u64).to_le_bytes(),
        ],
    )
}

/// Seed of one run. Deadline and agent kind are deliberately left out, so
/// run `r` of a set replays the same random stream across every τ and both
/// kinds.
pub fn run_seed(master: u64, dataset: &str, n: usize, set: usize, run: usize) -> u64 {
    derive_seed(
        master,
        &[
            b"run",
            dataset.as_bytes(),
            &(n as u64).to_le_bytes(),
            &(set as u64).to_le_bytes(),
            &(run as u64).to_le_bytes(),
        ],
    )
}

pub fn sample_sets(
    config: &ExperimentConfig,
    dataset: &Dataset,
    n: usize,
) -> Vec<PreferenceProfile> {
    (0..config.preference_sets)
        .map(|set| {
            let seed = profile_seed(config.master_seed, dataset.name(), n, set);
            dataset.sample_profile(n, &mut cud_core::protocol_rng(seed))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn run_setting(
    config: &ExperimentConfig,
    dataset: &str,
    profile: &PreferenceProfile,
    set: usize,
    tau: u32,
    kind: AgentKind,
) -> Result<SettingResult, ExperimentError> {
    let n = profile.n();
    let rule = config.rule(n, tau)?;
    let truthful = profile.truthful_scores();
    let mut changes = Vec::with_capacity(config.runs_per_setting);
    let mut converged_changes = Vec::new();
    let mut winners = WinnerSet::EMPTY;
    for run in 0..config.runs_per_setting {
        let seed = run_seed(config.master_seed, dataset, n, set, run);
        let trace = run_protocol(profile, rule, kind, seed);
        let k = trace.vote_changes() as u32;
        changes.push(k);
        if let Some(w) = trace.winner.winner() {
            winners.insert(w);
            converged_changes.push(k);
        }
    }
    let (mean_changes, std_changes) = mean_std(changes.iter().map(|&k| k as f64));
    let runs = changes.len();
    let converged = converged_changes.len();
    Ok(SettingResult {
        dataset: dataset.to_string(),
        n,
        sigma: rule.sigma,
        tau,
        kind,
        set,
        runs,
        converged,
        converged_fraction: converged as f64 / runs as f64,
        mean_changes,
        std_changes,
        mean_changes_converged: (converged > 0)
            .then(|| mean_std(converged_changes.iter().map(|&k| k as f64)).0),
        max_changes: changes.iter().copied().max().unwrap_or(0),
        truthful_max: truthful.max(),
        sampled_poa: winners
            .iter()
            .map(|c| truthful.get(c))
            .min()
            .map(|worst| truthful.max() - worst),
        winners: winners.bits(),
    })
}

/// Population mean and standard deviation; `(0, 0)` for no samples.
pub fn mean_std(xs: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let xs: Vec<f64> = xs.into_iter().collect();
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
    (mean, var.sqrt())
}

/// Every setting of the sweep, ordered by (dataset, n, set, τ, kind).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub settings: Vec<SettingResult>,
}

/// Runs the sweep in parallel. `on_group` sees each finished
/// `(dataset, n)` block in order, e.g. to flush CSV rows early.
pub fn run_sweep_with(
    config: &ExperimentConfig,
    base: Option<&Path>,
    mut on_group: impl FnMut(&[SettingResult]) -> Result<(), ExperimentError>,
) -> Result<SweepResult, ExperimentError> {
    config.validate()?;
    let mut settings = Vec::new();
    for spec in &config.datasets {
        let dataset = Dataset::load(spec, base)?;
        for &n in &config.voters {
            let sets = sample_sets(config, &dataset, n);
            let mut jobs = Vec::new();
            for set in 0..sets.len() {
                for tau in config.taus(n) {
                    for &kind in &config.kinds {
                        jobs.push((set, tau, kind));
                    }
                }
            }
            let group = jobs
                .par_iter()
                .map(|&(set, tau, kind)| {
                    run_setting(config, dataset.name(), &sets[set], set, tau, kind)
                })
                .collect::<Result<Vec<_>, _>>()?;
            on_group(&group)?;
            settings.extend(group);
        }
    }
    Ok(SweepResult {
        config: config.clone(),
        settings,
    })
}

pub fn run_sweep(
    config: &ExperimentConfig,
    base: Option<&Path>,
) -> Result<SweepResult, ExperimentError> {
    run_sweep_with(config, base, |_| Ok(()))
}
