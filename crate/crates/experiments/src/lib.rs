//! Batch simulation of the deadline voting protocol.
//!
//! A sweep samples `preference_sets` profiles per dataset and voter count,
//! then runs `runs_per_setting` seeded protocol runs for every deadline and
//! agent kind. Run `r` of a preference set uses the same seed for every
//! deadline and both agent kinds, so kinds are compared on identical random
//! streams.

mod aggregate;
mod config;
mod dataset;
mod error;
mod output;
mod soc;
mod sweep;

pub use aggregate::{
    aggregate, change_summary, compare_kinds, convergence_table, min_tau_all_converge,
    AggregateRow, ChangeSummary, KindComparison, KindPair,
};
pub use config::ExperimentConfig;
pub use dataset::{Dataset, DatasetSpec, Source};
pub use error::ExperimentError;
pub use output::{append_settings, settings_writer, write_aggregate};
pub use soc::{parse_soc, parse_soc_file, SocData};
pub use sweep::{
    mean_std, profile_seed, run_seed, run_setting, run_sweep, run_sweep_with, sample_sets,
    SettingResult, SweepResult,
};
