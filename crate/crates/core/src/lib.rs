//! Consensus under a deadline: iterative plurality voting with a majority
//! threshold and a hard step budget.
//!
//! Voters start on their truthful top choice. At every step each voter asks
//! "if I were picked to re-vote now, which ballot would I cast?", the voters
//! who want to move raise their hands, and one of them is drawn uniformly at
//! random to apply the change. The multi-stage defaulted voting rule
//! ([`mdvr`]) decides when the run is over: a candidate that can no longer be
//! caught wins, and if nobody can reach the threshold in time the default
//! alternative ψ is returned. By default a run continues until some candidate
//! actually holds `σ` ballots ([`StopRule::Consensus`]); stopping as soon as
//! the possible-winner set is a singleton is available as
//! [`StopRule::Singleton`] and always yields the same winner.
//!
//! Everything here is a pure function of `(profile, rule, agent kind, seed)`.

mod agent;
mod candidate;
mod error;
mod preference;
mod protocol;
mod rng;
mod rule;
mod score;

pub use agent::{best_response, compare_outcomes, AgentKind, Appraisal};
pub use candidate::{Candidate, Candidates, Outcome, WinnerSet, MAX_CANDIDATES};
pub use error::ModelError;
pub use preference::{Preference, PreferenceProfile};
pub use protocol::{
    run_protocol, run_with_picker, BallotChange, Election, GameTrace, HandRaise, Picker,
    ScriptedPicker, SeededPicker, StepRecord,
};
pub use rng::{derive_seed, protocol_rng, ProtocolRng};
pub use rule::{
    mdvr, possible_winners, threshold_winner, OutcomeView, RuleConfig, RuleVariant, StopRule,
};
pub use score::{BallotProfile, ScoreVector};
