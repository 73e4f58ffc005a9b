use cud_core::{Candidate, Outcome, ScoreVector};
use serde::{Deserialize, Serialize};

use crate::{ActionRecord, Irrationality};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrrationalCounts {
    pub oa: u32,
    pub ia: u32,
    /// Actions with at least one flag.
    pub flagged_actions: u32,
}

/// Summary of a finished game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameMetrics {
    pub converged: bool,
    pub winner: Option<Candidate>,
    pub rounds_used: u32,
    pub vote_changes: u32,
    /// Mean points over all seats; 0 without consensus.
    pub avg_reward_points: f64,
    /// Truthful plurality score minus the winner's truthful score; `None`
    /// without consensus.
    pub por: Option<u32>,
    pub irrational: IrrationalCounts,
    pub human_actions: u32,
}

pub fn price_of_reality(truthful: &ScoreVector, outcome: Outcome) -> Option<u32> {
    outcome.winner().map(|w| truthful.max() - truthful.get(w))
}

pub fn compute_metrics(
    outcome: Outcome,
    truthful: &ScoreVector,
    rounds_used: u32,
    vote_changes: u32,
    rewards: &[u32],
    actions: &[ActionRecord],
) -> GameMetrics {
    let mut irrational = IrrationalCounts::default();
    for action in actions {
        for flag in &action.flags {
            match flag.class {
                Irrationality::OpposingAlignment => irrational.oa += 1,
                Irrationality::InappropriateAlignment => irrational.ia += 1,
            }
        }
        irrational.flagged_actions += u32::from(!action.flags.is_empty());
    }
    let avg_reward_points = if rewards.is_empty() {
        0.0
    } else {
        rewards.iter().map(|&r| f64::from(r)).sum::<f64>() / rewards.len() as f64
    };
    GameMetrics {
        converged: !outcome.is_default(),
        winner: outcome.winner(),
        rounds_used,
        vote_changes,
        avg_reward_points,
        por: price_of_reality(truthful, outcome),
        irrational,
        human_actions: actions.len() as u32,
    }
}
