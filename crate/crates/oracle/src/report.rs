use std::fmt::Write as _;

use cud_core::{AgentKind, PreferenceProfile, RuleConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{CheckResult, Verdict};

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub instance: String,
    pub check: String,
    pub verdict: Verdict,
    pub witness: String,
}

impl Report {
    pub fn new(instance: &str, check: &str, result: CheckResult) -> Self {
        Report {
            instance: instance.to_string(),
            check: check.to_string(),
            verdict: result.verdict,
            witness: result.witness,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("plain struct")
    }
}

/// Short stable hash identifying `(profile, rule, kind)`.
pub fn instance_hash(
    profile: &PreferenceProfile,
    rule: &RuleConfig,
    kind: Option<AgentKind>,
) -> String {
    let encoded = serde_json::to_vec(&(profile, rule, kind)).expect("plain data");
    let digest = Sha256::digest(&encoded);
    let mut hex = String::with_capacity(16);
    for byte in &digest[..8] {
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

/// Counts per verdict over a batch of reports.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub pass: usize,
    pub fail: usize,
    pub skip: usize,
    pub not_applicable: usize,
}

impl Tally {
    pub fn of<'a>(reports: impl IntoIterator<Item = &'a Report>) -> Self {
        let mut t = Tally::default();
        for r in reports {
            match r.verdict {
                Verdict::Pass => t.pass += 1,
                Verdict::Fail => t.fail += 1,
                Verdict::Skip => t.skip += 1,
                Verdict::NotApplicable => t.not_applicable += 1,
            }
        }
        t
    }
}
