//! Exact analysis of small deadline-voting instances.
//!
//! [`enumerate`] walks every random pick the protocol can make, memoised on
//! `(ballots, t)`, and reports the set of reachable winners together with the
//! exact outcome distribution. The checkers in this crate compare those sets
//! against the convergence and price-of-anarchy results, and the generators
//! build the block profiles on which the bounds are attained.

mod checks;
mod enumerate;
mod error;
mod generators;
mod lemmas;
mod report;
mod suites;

pub use checks::{
    bound_report, check_corollary1, check_corollary1_trace, check_theorem2, check_theorem2_trace,
    check_theorem3, corollary1_predicts_convergence, exact_poa, sampled_poa, theorem2_candidate,
    theorem3_bound, Bound, BoundReport, CheckResult, Verdict,
};
pub use enumerate::{
    enumerate, enumerate_with, Budget, EdgeView, ReachableOutcome, StateView, Visitor,
};
pub use error::OracleError;
pub use generators::{
    all_profiles, condorcet_counterexample, gen_tightness_profile, permutations, random_profile,
    random_rule, BlockProfile, TightCase,
};
pub use lemmas::{check_edge, check_state, check_trace, Lemma, LemmaChecker, Violation};
pub use report::{instance_hash, Report, Tally};
pub use suites::{
    condorcet_suite, lemma_suite, run_suite, theorem_suite, tightness_parameters, tightness_suite,
    Grid, Suite, SuiteOptions, SuiteReport,
};
