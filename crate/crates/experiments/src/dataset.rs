use std::path::{Path, PathBuf};

use cud_core::{Candidates, Preference, PreferenceProfile};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{parse_soc_file, ExperimentError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// Uniform over all `m!` strict orders.
    ImpartialCulture(usize),
    /// Orders resampled from a SOC file, weighted by multiplicity.
    SocFile(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub name: String,
    #[serde(flatten)]
    pub source: Source,
}

impl DatasetSpec {
    pub fn uniform(m: usize) -> Self {
        DatasetSpec {
            name: format!("Uniform{m}"),
            source: Source::ImpartialCulture(m),
        }
    }
}

/// A loaded profile source.
#[derive(Debug, Clone)]
pub struct Dataset {
    name: String,
    candidates: Candidates,
    pool: Option<(Vec<Preference>, WeightedIndex<u32>)>,
}

impl Dataset {
    /// Relative SOC paths are resolved against `base` when given.
    pub fn load(spec: &DatasetSpec, base: Option<&Path>) -> Result<Self, ExperimentError> {
        match &spec.source {
            Source::ImpartialCulture(m) => {
                if *m < 2 {
                    return Err(ExperimentError::Config(format!(
                        "{}: impartial culture needs m ≥ 2, got {m}",
                        spec.name
                    )));
                }
                Ok(Dataset {
                    name: spec.name.clone(),
                    candidates: Candidates::numbered(*m)?,
                    pool: None,
                })
            }
            Source::SocFile(path) => {
                let path = match base {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.clone(),
                };
                let soc = parse_soc_file(&path)?;
                let (orders, weights): (Vec<_>, Vec<_>) = soc.orders.into_iter().unzip();
                let index = WeightedIndex::new(&weights)
                    .map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
                Ok(Dataset {
                    name: spec.name.clone(),
                    candidates: soc.candidates,
                    pool: Some((orders, index)),
                })
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn m(&self) -> usize {
        self.candidates.len()
    }

    pub fn candidates(&self) -> &Candidates {
        &self.candidates
    }

    /// `n` orders drawn independently with replacement.
    pub fn sample_profile(&self, n: usize, rng: &mut impl Rng) -> PreferenceProfile {
        let m = self.m();
        let voters = (0..n)
            .map(|_| match &self.pool {
                Some((orders, index)) => orders[index.sample(rng)].clone(),
                None => {
                    let mut order: Vec<usize> = (0..m).collect();
                    order.shuffle(rng);
                    Preference::from_indices(&order).expect("permutation")
                }
            })
            .collect();
        PreferenceProfile::new(self.candidates.clone(), voters).expect("orders match candidates")
    }
}
