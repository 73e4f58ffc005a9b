use std::time::Instant;

use cud_oracle::{run_suite, Suite, SuiteOptions, Verdict};

#[test]
fn all_suites_pass_at_reduced_scale() {
    let opts = SuiteOptions {
        random_runs: 500,
        random_instances: 200,
        ..SuiteOptions::default()
    };
    for suite in Suite::ALL {
        let start = Instant::now();
        let report = run_suite(suite, &opts).unwrap();
        let tally = report.tally();
        eprintln!("{suite:?}: {tally:?} in {:?}", start.elapsed());
        for (check, t) in report.by_check() {
            eprintln!("  {check}: {t:?}");
        }
        let fails: Vec<_> = report.failures().map(|r| r.witness.clone()).collect();
        assert!(fails.is_empty(), "{suite:?}: {fails:#?}");
        assert!(tally.pass > 0);
        assert!(report.reports.iter().all(|r| r.verdict != Verdict::Fail));
    }
}
