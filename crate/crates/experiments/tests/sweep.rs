use std::collections::BTreeMap;

use cud_core::{AgentKind, RuleConfig, StopRule};
use cud_experiments::*;
use cud_oracle::{corollary1_predicts_convergence, enumerate, exact_poa, theorem3_bound, Budget};

fn small_config(seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(
        vec![DatasetSpec::uniform(3), DatasetSpec::uniform(4)],
        vec![5, 6],
    );
    cfg.preference_sets = 4;
    cfg.runs_per_setting = 60;
    cfg.master_seed = seed;
    cfg
}

#[test]
fn sweeps_are_reproducible() {
    let cfg = small_config(11);
    let a = run_sweep(&cfg, None).unwrap();
    let b = run_sweep(&cfg, None).unwrap();
    assert_eq!(a, b);
    let other = run_sweep(&small_config(12), None).unwrap();
    assert_ne!(a.settings, other.settings);
}

#[test]
fn settings_cover_the_grid_in_order() {
    let cfg = small_config(3);
    let res = run_sweep(&cfg, None).unwrap();
    // 2 datasets, n ∈ {5, 6} with τ = 2..=n+1, 4 sets, 2 kinds.
    assert_eq!(res.settings.len(), 2 * (5 + 6) * 4 * 2);
    let mut groups = Vec::new();
    for s in &res.settings {
        let key = (s.dataset.clone(), s.n);
        if groups.last() != Some(&key) {
            groups.push(key);
        }
    }
    assert_eq!(groups.len(), 4);
    for s in &res.settings {
        assert_eq!(s.runs, 60);
        assert_eq!(s.sigma, s.n as u32);
    }
}

#[test]
fn convergence_follows_the_truthful_maximum() {
    let cfg = small_config(5);
    let res = run_sweep(&cfg, None).unwrap();
    for s in &res.settings {
        let expected = s.truthful_max + s.tau >= s.sigma;
        assert_eq!(s.converged == s.runs, expected, "{s:?}");
        assert_eq!(s.converged == 0, !expected, "{s:?}");
        assert!(s.max_changes <= s.tau);
        assert_eq!(s.sampled_poa.is_some(), s.converged > 0);
    }
}

type SetKey = (String, usize, usize, u8);

#[test]
fn convergence_is_monotone_in_the_deadline() {
    let res = run_sweep(&small_config(8), None).unwrap();
    let mut by_set: BTreeMap<SetKey, Vec<(u32, usize)>> = BTreeMap::new();
    for s in &res.settings {
        let k = matches!(s.kind, AgentKind::Proactive) as u8;
        by_set
            .entry((s.dataset.clone(), s.n, s.set, k))
            .or_default()
            .push((s.tau, s.converged));
    }
    for series in by_set.values_mut() {
        series.sort();
        assert!(series.windows(2).all(|w| w[0].1 <= w[1].1), "{series:?}");
    }
}

#[test]
fn sampled_poa_is_within_exact_and_theoretical_bounds() {
    let mut cfg = ExperimentConfig::new(vec![DatasetSpec::uniform(3)], vec![5]);
    cfg.preference_sets = 5;
    cfg.runs_per_setting = 40;
    cfg.master_seed = 2;
    let dataset = Dataset::load(&cfg.datasets[0], None).unwrap();
    let sets = sample_sets(&cfg, &dataset, 5);
    let res = run_sweep(&cfg, None).unwrap();
    for s in &res.settings {
        let profile = &sets[s.set];
        let rule = RuleConfig::unanimity(5, s.tau).unwrap().with_stop(cfg.stop);
        assert_eq!(
            corollary1_predicts_convergence(profile, &rule),
            s.converged == s.runs
        );
        let Some(poa) = s.sampled_poa else { continue };
        let bound = theorem3_bound(5, s.sigma, s.tau).unwrap().bound;
        assert!(poa <= bound, "{s:?} bound {bound}");
        let reach = enumerate(profile, rule, s.kind, &Budget::default()).unwrap();
        let exact = exact_poa(profile, &reach).unwrap();
        assert!(poa <= exact, "{s:?} exact {exact}");
        let observed = cud_core::WinnerSet::from_bits(s.winners);
        assert!(observed.is_subset(reach.winners));
    }
}

#[test]
fn stop_rule_changes_only_the_change_counts() {
    let singleton = small_config(9);
    assert_eq!(singleton.stop, StopRule::Singleton);
    let mut consensus = singleton.clone();
    consensus.stop = StopRule::Consensus;
    let a = run_sweep(&singleton, None).unwrap();
    let b = run_sweep(&consensus, None).unwrap();
    for (x, y) in a.settings.iter().zip(&b.settings) {
        assert_eq!(x.converged, y.converged);
        assert_eq!(x.winners, y.winners);
        assert_eq!(x.sampled_poa, y.sampled_poa);
        assert!(x.mean_changes <= y.mean_changes + 1e-9);
    }
}

#[test]
fn kind_comparison_pairs_every_setting() {
    let res = run_sweep(&small_config(4), None).unwrap();
    let cmp = compare_kinds(&res.settings);
    assert_eq!(cmp.pairs.len(), res.settings.len() / 2);
    assert!(cmp.convergence_identical());
    assert_eq!(
        cmp.unordered_pairs,
        cmp.pairs.iter().filter(|p| !p.changes_ordered()).count()
    );
}

#[test]
fn aggregates_are_consistent() {
    let res = run_sweep(&small_config(6), None).unwrap();
    let rows = aggregate(&res.settings);
    assert_eq!(rows.len(), res.settings.len() / 4);
    for row in &rows {
        assert_eq!(row.sets, 4);
        assert_eq!(row.all_converged, row.converged_fraction == 1.0);
        if let Some(p) = row.poa_mean {
            assert!(p >= 0.0);
            assert!(row.poa_sets > 0);
        }
    }
    for (dataset, n, kind, tau) in convergence_table(&res.settings) {
        let tau = tau.expect("τ = n + 1 always converges");
        assert!(tau <= n as u32 + 1);
        assert!(rows
            .iter()
            .filter(|r| r.dataset == dataset && r.n == n && r.kind == kind && r.tau >= tau)
            .all(|r| r.all_converged));
    }
    let summary = change_summary(&res.settings);
    assert_eq!(summary.len(), 2 * 2 * 2);
    assert!(summary.iter().all(|s| s.mean >= 0.0 && s.cells > 0));
}

#[test]
fn min_tau_examples() {
    let mk = |tau: u32, converged: usize| SettingResult {
        dataset: "d".into(),
        n: 4,
        sigma: 4,
        tau,
        kind: AgentKind::Lazy,
        set: 0,
        runs: 10,
        converged,
        converged_fraction: converged as f64 / 10.0,
        mean_changes: 0.0,
        std_changes: 0.0,
        mean_changes_converged: None,
        max_changes: 0,
        truthful_max: 1,
        sampled_poa: None,
        winners: 0,
    };
    let rows = vec![mk(2, 0), mk(3, 10), mk(4, 9), mk(5, 10)];
    assert_eq!(
        min_tau_all_converge(&rows, "d", 4, AgentKind::Lazy),
        Some(5)
    );
    let rows = vec![mk(2, 0), mk(3, 10), mk(4, 10)];
    assert_eq!(
        min_tau_all_converge(&rows, "d", 4, AgentKind::Lazy),
        Some(3)
    );
    let rows = vec![mk(2, 10), mk(3, 0)];
    assert_eq!(min_tau_all_converge(&rows, "d", 4, AgentKind::Lazy), None);
    assert_eq!(
        min_tau_all_converge(&rows, "d", 4, AgentKind::Proactive),
        None
    );
}

#[test]
fn config_from_toml() {
    let cfg = ExperimentConfig::from_toml(
        r#"
        name = "desk"
        voters = [10]
        preference_sets = 3
        runs_per_setting = 20
        master_seed = 4
        kinds = ["lazy"]

        [[dataset]]
        name = "Uniform5"
        impartial_culture = 5
        "#,
    )
    .unwrap();
    assert_eq!(cfg.name, "desk");
    assert_eq!(cfg.taus(10), (2..=11).collect::<Vec<_>>());
    assert_eq!(cfg.kinds, vec![AgentKind::Lazy]);
    assert_eq!(cfg.stop, StopRule::Singleton);
    assert_eq!(cfg.datasets[0], DatasetSpec::uniform(5));
    let text = toml::to_string(&cfg).unwrap();
    assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
}

#[test]
fn config_rejects_bad_values() {
    let base = "voters = [4]\n[[dataset]]\nname = \"U\"\nimpartial_culture = 3\n";
    assert!(ExperimentConfig::from_toml(base).is_ok());
    for bad in [
        "voters = []\n[[dataset]]\nname = \"U\"\nimpartial_culture = 3\n".to_string(),
        format!("sigma = 2\n{base}"),
        format!("sigma = 5\n{base}"),
        format!("runs_per_setting = 0\n{base}"),
        format!("tau = []\n{base}"),
        format!("colour = 1\n{base}"),
        "voters = [4]\n".to_string(),
    ] {
        assert!(ExperimentConfig::from_toml(&bad).is_err(), "{bad}");
    }
}

#[test]
fn soc_datasets_sample_listed_orders() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.soc");
    std::fs::write(
        &path,
        "# FILE NAME: tiny.soc\n# NUMBER ALTERNATIVES: 3\n# ALTERNATIVE NAME 1: x\n\
         # ALTERNATIVE NAME 2: y\n# ALTERNATIVE NAME 3: z\n3: 1,2,3\n1: 3,2,1\n",
    )
    .unwrap();
    let spec: DatasetSpec = toml::from_str("name = \"tiny\"\nsoc_file = \"tiny.soc\"\n").unwrap();
    let dataset = Dataset::load(&spec, Some(dir.path())).unwrap();
    assert_eq!(dataset.m(), 3);
    let mut rng = cud_core::protocol_rng(1);
    let profile = dataset.sample_profile(200, &mut rng);
    let tops = profile.truthful_scores();
    assert_eq!(tops.get(cud_core::Candidate(1)), 0);
    let x = tops.get(cud_core::Candidate(0));
    assert!((120..=180).contains(&x), "{x}");

    let missing = DatasetSpec {
        name: "gone".into(),
        source: Source::SocFile("nope.soc".into()),
    };
    assert!(Dataset::load(&missing, Some(dir.path())).is_err());
}

#[test]
fn csv_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let res = run_sweep(&small_config(1), None).unwrap();
    let path = dir.path().join("settings.csv");
    let mut writer = settings_writer(&path).unwrap();
    append_settings(&mut writer, &res.settings).unwrap();
    drop(writer);
    let mut reader = csv::Reader::from_path(&path).unwrap();
    let back: Vec<SettingResult> = reader.deserialize().collect::<Result<_, _>>().unwrap();
    assert_eq!(back.len(), res.settings.len());
    for (a, b) in back.iter().zip(&res.settings) {
        assert_eq!(a.converged, b.converged);
        assert_eq!(a.sampled_poa, b.sampled_poa);
        assert_eq!(a.winners, b.winners);
        assert!((a.mean_changes - b.mean_changes).abs() < 1e-9);
    }

    let agg = dir.path().join("aggregate.csv");
    let rows = aggregate(&res.settings);
    write_aggregate(&agg, &rows).unwrap();
    let text = std::fs::read_to_string(&agg).unwrap();
    assert_eq!(text.lines().count(), rows.len() + 1);
    assert!(text.starts_with("dataset,n,sigma,tau,kind,"));
}
