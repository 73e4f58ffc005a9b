//! Tables over preference sets: convergence thresholds, vote changes and
//! sampled price of anarchy.

use std::collections::BTreeMap;

use cud_core::AgentKind;
use serde::{Deserialize, Serialize};

use crate::{mean_std, SettingResult};

/// One `(dataset, n, τ, kind)` cell averaged over preference sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub dataset: String,
    pub n: usize,
    pub sigma: u32,
    pub tau: u32,
    pub kind: AgentKind,
    pub sets: usize,
    pub converged_fraction: f64,
    pub all_converged: bool,
    /// Mean and spread of per-set mean vote changes.
    pub mean_changes: f64,
    pub std_changes: f64,
    /// Mean and spread of per-set sampled PoA⁺ over sets where it is defined.
    pub poa_mean: Option<f64>,
    pub poa_std: Option<f64>,
    pub poa_sets: usize,
}

type CellKey = (String, usize, u32, AgentKind);

fn kind_order(k: AgentKind) -> u8 {
    match k {
        AgentKind::Lazy => 0,
        AgentKind::Proactive => 1,
    }
}

pub fn aggregate(settings: &[SettingResult]) -> Vec<AggregateRow> {
    let mut cells: BTreeMap<(String, usize, u32, u8), Vec<&SettingResult>> = BTreeMap::new();
    for s in settings {
        cells
            .entry((s.dataset.clone(), s.n, s.tau, kind_order(s.kind)))
            .or_default()
            .push(s);
    }
    cells
        .into_values()
        .map(|group| {
            let first = group[0];
            let runs: usize = group.iter().map(|s| s.runs).sum();
            let converged: usize = group.iter().map(|s| s.converged).sum();
            let (mean_changes, std_changes) = mean_std(group.iter().map(|s| s.mean_changes));
            let poas: Vec<f64> = group
                .iter()
                .filter_map(|s| s.sampled_poa)
                .map(f64::from)
                .collect();
            let poa_sets = poas.len();
            let (pm, ps) = mean_std(poas);
            AggregateRow {
                dataset: first.dataset.clone(),
                n: first.n,
                sigma: first.sigma,
                tau: first.tau,
                kind: first.kind,
                sets: group.len(),
                converged_fraction: converged as f64 / runs as f64,
                all_converged: converged == runs,
                mean_changes,
                std_changes,
                poa_mean: (poa_sets > 0).then_some(pm),
                poa_std: (poa_sets > 0).then_some(ps),
                poa_sets,
            }
        })
        .collect()
}

/// Smallest swept τ from which on every run of every set converged.
pub fn min_tau_all_converge(
    settings: &[SettingResult],
    dataset: &str,
    n: usize,
    kind: AgentKind,
) -> Option<u32> {
    let mut by_tau: BTreeMap<u32, bool> = BTreeMap::new();
    for s in settings
        .iter()
        .filter(|s| s.dataset == dataset && s.n == n && s.kind == kind)
    {
        *by_tau.entry(s.tau).or_insert(true) &= s.converged == s.runs;
    }
    let mut answer = None;
    for (tau, all) in by_tau.into_iter().rev() {
        if !all {
            break;
        }
        answer = Some(tau);
    }
    answer
}

/// Convergence-threshold table: one entry per `(dataset, n, kind)`.
pub fn convergence_table(
    settings: &[SettingResult],
) -> Vec<(String, usize, AgentKind, Option<u32>)> {
    let mut keys: Vec<CellKey> = settings
        .iter()
        .map(|s| (s.dataset.clone(), s.n, 0, s.kind))
        .collect();
    keys.sort_by_key(|(d, n, _, k)| (d.clone(), *n, kind_order(*k)));
    keys.dedup();
    keys.into_iter()
        .map(|(d, n, _, k)| {
            let t = min_tau_all_converge(settings, &d, n, k);
            (d, n, k, t)
        })
        .collect()
}

/// Mean vote changes to reach consensus for one `(dataset, n, kind)`:
/// per-set averages of converged runs over every swept τ, then mean and
/// spread across those `(set, τ)` averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeSummary {
    pub dataset: String,
    pub n: usize,
    pub kind: AgentKind,
    pub mean: f64,
    pub std: f64,
    pub cells: usize,
}

pub fn change_summary(settings: &[SettingResult]) -> Vec<ChangeSummary> {
    let mut groups: BTreeMap<(String, usize, u8), Vec<&SettingResult>> = BTreeMap::new();
    for s in settings {
        groups
            .entry((s.dataset.clone(), s.n, kind_order(s.kind)))
            .or_default()
            .push(s);
    }
    groups
        .into_values()
        .map(|g| {
            let values: Vec<f64> = g.iter().filter_map(|s| s.mean_changes_converged).collect();
            let cells = values.len();
            let (mean, std) = mean_std(values);
            ChangeSummary {
                dataset: g[0].dataset.clone(),
                n: g[0].n,
                kind: g[0].kind,
                mean,
                std,
                cells,
            }
        })
        .collect()
}

/// Lazy vs proactive on the same preference set, deadline and seeds.
/// Change counts are means over converged runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindPair {
    pub dataset: String,
    pub n: usize,
    pub tau: u32,
    pub set: usize,
    pub lazy_changes: Option<f64>,
    pub proactive_changes: Option<f64>,
    pub lazy_poa: Option<u32>,
    pub proactive_poa: Option<u32>,
    pub lazy_converged: usize,
    pub proactive_converged: usize,
}

impl KindPair {
    pub fn change_delta(&self) -> Option<f64> {
        Some(self.proactive_changes? - self.lazy_changes?)
    }

    pub fn changes_ordered(&self) -> bool {
        self.change_delta().is_none_or(|d| d >= -1e-9)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindComparison {
    pub pairs: Vec<KindPair>,
    /// Pairs whose sampled PoA⁺ differs.
    pub poa_mismatches: usize,
    /// Pairs whose convergence counts differ.
    pub convergence_mismatches: usize,
    /// Pairs where proactive voters made fewer changes than lazy ones.
    pub unordered_pairs: usize,
    /// Mean of proactive minus lazy changes over pairs with converged runs.
    pub mean_delta: f64,
}

impl KindComparison {
    pub fn poa_identical(&self) -> bool {
        self.poa_mismatches == 0
    }

    pub fn convergence_identical(&self) -> bool {
        self.convergence_mismatches == 0
    }

    pub fn changes_ordered(&self) -> bool {
        self.unordered_pairs == 0
    }
}

pub fn compare_kinds(settings: &[SettingResult]) -> KindComparison {
    let mut lazy: BTreeMap<(String, usize, u32, usize), &SettingResult> = BTreeMap::new();
    let mut pro = BTreeMap::new();
    for s in settings {
        let key = (s.dataset.clone(), s.n, s.tau, s.set);
        match s.kind {
            AgentKind::Lazy => lazy.insert(key, s),
            AgentKind::Proactive => pro.insert(key, s),
        };
    }
    let pairs: Vec<KindPair> = lazy
        .iter()
        .filter_map(|(key, l)| {
            let p = pro.get(key)?;
            Some(KindPair {
                dataset: key.0.clone(),
                n: key.1,
                tau: key.2,
                set: key.3,
                lazy_changes: l.mean_changes_converged,
                proactive_changes: p.mean_changes_converged,
                lazy_poa: l.sampled_poa,
                proactive_poa: p.sampled_poa,
                lazy_converged: l.converged,
                proactive_converged: p.converged,
            })
        })
        .collect();
    KindComparison {
        poa_mismatches: pairs
            .iter()
            .filter(|p| p.lazy_poa != p.proactive_poa)
            .count(),
        convergence_mismatches: pairs
            .iter()
            .filter(|p| p.lazy_converged != p.proactive_converged)
            .count(),
        unordered_pairs: pairs.iter().filter(|p| !p.changes_ordered()).count(),
        mean_delta: mean_std(pairs.iter().filter_map(KindPair::change_delta)).0,
        pairs,
    }
}
