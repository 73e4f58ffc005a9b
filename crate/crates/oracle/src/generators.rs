//! Profiles that make the price-of-anarchy bounds tight, the Condorcet
//! counterexample family, and plain enumeration of small profile spaces.

use cud_core::{Candidate, Candidates, Preference, PreferenceProfile, RuleConfig};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::OracleError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TightCase {
    /// `σ − ⌊n/2⌋ < τ < σ`
    Two,
    /// `τ ≥ σ`
    Three,
}

/// A block-structured profile with its two contenders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockProfile {
    pub profile: PreferenceProfile,
    pub rule: RuleConfig,
    pub blocks: [usize; 3],
    /// Truthful plurality winner.
    pub w: Candidate,
    /// Weak candidate the run may still converge to.
    pub c: Candidate,
}

/// Ranking that starts with `head` and lists the remaining candidates in
/// index order.
fn ranking(m: usize, head: &[usize]) -> Preference {
    let mut order = head.to_vec();
    order.extend((0..m).filter(|i| !head.contains(i)));
    Preference::from_indices(&order).expect("head entries are distinct")
}

/// Candidates are `c`, `w`, `c1..ck` (indices 0, 1, 2..).
pub fn gen_tightness_profile(
    case: TightCase,
    n: usize,
    sigma: u32,
    tau: u32,
) -> Result<BlockProfile, OracleError> {
    let rule = RuleConfig::majority(n, sigma, tau)?;
    let half = n / 2;
    if n.is_multiple_of(2) {
        return Err(OracleError::Infeasible(format!("n = {n} must be odd")));
    }
    let (b1, b2, b3) = match case {
        TightCase::Two => {
            let gap = (sigma as usize).saturating_sub(tau as usize);
            if !(tau < sigma && gap < half) {
                return Err(OracleError::Infeasible(format!(
                    "need σ − ⌊n/2⌋ < τ < σ, got n={n} σ={sigma} τ={tau}"
                )));
            }
            if gap < 2 {
                return Err(OracleError::Infeasible(format!(
                    "need σ − τ ≥ 2, got {gap}"
                )));
            }
            (gap, half, n - half - gap)
        }
        TightCase::Three => {
            if tau < sigma {
                return Err(OracleError::Infeasible(format!(
                    "need τ ≥ σ, got τ={tau} σ={sigma}"
                )));
            }
            if n < 3 {
                return Err(OracleError::Infeasible("need n ≥ 3".into()));
            }
            (half, 1, half)
        }
    };
    let k = b3;
    let m = k + 2;
    let mut names = vec!["c".to_string(), "w".to_string()];
    names.extend((1..=k).map(|j| format!("c{j}")));
    let candidates = Candidates::new(names)?;
    let (c, w, cj) = (0usize, 1usize, |j: usize| j + 1);

    let mut voters = Vec::with_capacity(n);
    match case {
        TightCase::Two => {
            voters.extend((0..b1).map(|_| ranking(m, &[c, cj(1)])));
            voters.extend((0..b2).map(|_| ranking(m, &[w, c])));
        }
        TightCase::Three => {
            voters.extend((0..b1).map(|_| ranking(m, &[w, c])));
            voters.extend((0..b2).map(|_| ranking(m, &[c, cj(1)])));
        }
    }
    voters.extend((1..=b3).map(|j| ranking(m, &[cj(j), c])));
    Ok(BlockProfile {
        profile: PreferenceProfile::new(candidates, voters)?,
        rule,
        blocks: [b1, b2, b3],
        w: Candidate::from(w),
        c: Candidate::from(c),
    })
}

/// Everyone ranks `c` second; tops split evenly over `a1, a2, a3`.
/// Returns the profile and `c`.
pub fn condorcet_counterexample(
    n: usize,
    m: usize,
) -> Result<(PreferenceProfile, Candidate), OracleError> {
    if n == 0 || !n.is_multiple_of(3) {
        return Err(OracleError::Infeasible(format!(
            "n = {n} must be a positive multiple of 3"
        )));
    }
    if m < 4 {
        return Err(OracleError::Infeasible(format!(
            "m = {m} must be at least 4"
        )));
    }
    let mut names: Vec<String> = vec!["a1".into(), "a2".into(), "a3".into(), "c".into()];
    names.extend((1..=m - 4).map(|j| format!("d{j}")));
    let candidates = Candidates::new(names)?;
    let voters = (0..n).map(|i| ranking(m, &[i % 3, 3])).collect();
    Ok((PreferenceProfile::new(candidates, voters)?, Candidate(3)))
}

/// All `m!` orders of `0..m`, lexicographic.
pub fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; m], &mut out);
    out
}

/// Every profile of `n` voters over `c1..cm`: `(m!)^n` of them.
pub fn all_profiles(n: usize, m: usize) -> impl Iterator<Item = PreferenceProfile> {
    let perms: Vec<Preference> = permutations(m)
        .iter()
        .map(|p| Preference::from_indices(p).expect("permutation"))
        .collect();
    let candidates = Candidates::numbered(m).expect("m ≥ 1");
    let total = perms.len().pow(n as u32);
    (0..total).map(move |mut code| {
        let voters = (0..n)
            .map(|_| {
                let p = perms[code % perms.len()].clone();
                code /= perms.len();
                p
            })
            .collect();
        PreferenceProfile::new(candidates.clone(), voters).expect("well formed")
    })
}

/// Impartial-culture profile over `c1..cm`.
pub fn random_profile(rng: &mut impl Rng, n: usize, m: usize) -> PreferenceProfile {
    let voters = (0..n)
        .map(|_| {
            let mut order: Vec<usize> = (0..m).collect();
            order.shuffle(rng);
            Preference::from_indices(&order).expect("permutation")
        })
        .collect();
    PreferenceProfile::new(Candidates::numbered(m).expect("m ≥ 1"), voters).expect("well formed")
}

/// A random valid rule for `n` voters: `σ` uniform in `(n/2, n]`, `τ` in `0..=max_tau`.
pub fn random_rule(rng: &mut impl Rng, n: usize, max_tau: u32) -> RuleConfig {
    let sigma = rng.random_range(n as u32 / 2 + 1..=n as u32);
    let tau = rng.random_range(0..=max_tau);
    RuleConfig::majority(n, sigma, tau).expect("σ in range")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_sizes() {
        let case2 = gen_tightness_profile(TightCase::Two, 7, 6, 4).unwrap();
        assert_eq!(case2.blocks, [2, 3, 2]);
        assert_eq!(case2.profile.m(), 4);
        let s = case2.profile.truthful_scores();
        assert_eq!((s.get(case2.w), s.get(case2.c)), (3, 2));

        let case3 = gen_tightness_profile(TightCase::Three, 5, 5, 5).unwrap();
        assert_eq!(case3.blocks, [2, 1, 2]);
        let s = case3.profile.truthful_scores();
        assert_eq!((s.get(case3.w), s.get(case3.c)), (2, 1));
    }

    #[test]
    fn infeasible_parameters() {
        assert!(gen_tightness_profile(TightCase::Two, 8, 6, 4).is_err());
        assert!(gen_tightness_profile(TightCase::Two, 7, 6, 5).is_err());
        assert!(gen_tightness_profile(TightCase::Two, 7, 7, 3).is_err());
        assert!(gen_tightness_profile(TightCase::Three, 7, 6, 5).is_err());
        assert!(condorcet_counterexample(4, 4).is_err());
        assert!(condorcet_counterexample(3, 3).is_err());
    }

    #[test]
    fn condorcet_shape() {
        let (p, c) = condorcet_counterexample(6, 5).unwrap();
        assert_eq!(p.truthful_scores().as_slice(), &[2, 2, 2, 0, 0]);
        assert!(p.voters().iter().all(|v| v.order()[1] == c));
    }

    #[test]
    fn profile_space_sizes() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(all_profiles(2, 3).count(), 36);
        assert_eq!(all_profiles(3, 1).count(), 1);
    }
}
