//! Profile files.
//!
//! A profile is a TOML file listing candidate names and one ranking per
//! voter, best first:
//!
//! ```toml
//! candidates = ["a", "b", "c"]
//! voters = [
//!     ["a", "b", "c"],
//!     ["b", "c", "a"],
//!     ["c", "a", "b"],
//! ]
//! ```
//!
//! Files ending in `.json` hold the same two fields as JSON. Files ending in
//! `.soc` are read as strict-order-complete preference files, each order
//! repeated by its count.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use cud_core::{derive_seed, protocol_rng, Candidates, PreferenceProfile};
use serde::{Deserialize, Serialize};

use crate::{write_file, CliError, Context, Format};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    pub candidates: Vec<String>,
    pub voters: Vec<Vec<String>>,
}

impl ProfileFile {
    pub fn of(profile: &PreferenceProfile) -> Self {
        let names = profile.candidates();
        ProfileFile {
            candidates: names.names().to_vec(),
            voters: profile
                .voters()
                .iter()
                .map(|p| {
                    p.order()
                        .iter()
                        .map(|&c| names.name(c).to_string())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_profile(&self) -> Result<PreferenceProfile, CliError> {
        Ok(PreferenceProfile::from_names(
            &self.candidates,
            &self.voters,
        )?)
    }
}

pub fn profile_to_toml(profile: &PreferenceProfile) -> String {
    toml::to_string(&ProfileFile::of(profile)).expect("profiles serialize")
}

pub fn load_profile(path: &Path) -> Result<PreferenceProfile, CliError> {
    if path.extension().is_some_and(|e| e == "soc") {
        let soc = cud_experiments::parse_soc_file(path)?;
        let voters = soc
            .orders
            .iter()
            .flat_map(|(p, k)| std::iter::repeat_n(p.clone(), *k as usize))
            .collect();
        return Ok(PreferenceProfile::new(soc.candidates, voters)?);
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |e: String| CliError::invalid(format!("{}: {e}", path.display()));
    let file: ProfileFile = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?
    } else {
        toml::from_str(&text).map_err(|e| bad(e.to_string()))?
    };
    file.to_profile()
}

/// `N,M`: `N` voters drawn uniformly over the strict orders of `M` candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomSpec {
    pub n: usize,
    pub m: usize,
}

impl FromStr for RandomSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (n, m) = s
            .split_once(',')
            .ok_or_else(|| format!("expected N,M, got {s:?}"))?;
        let n: usize = n.trim().parse().map_err(|e| format!("voters: {e}"))?;
        let m: usize = m.trim().parse().map_err(|e| format!("candidates: {e}"))?;
        if n == 0 || m == 0 {
            return Err("need at least one voter and one candidate".into());
        }
        Ok(RandomSpec { n, m })
    }
}

impl RandomSpec {
    pub fn sample(self, seed: u64) -> Result<PreferenceProfile, CliError> {
        Candidates::numbered(self.m)?;
        let mut rng = protocol_rng(seed);
        Ok(cud_oracle::random_profile(&mut rng, self.n, self.m))
    }
}

/// Where a command takes its profile from.
#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct ProfileSource {
    /// Profile file (TOML, or `.soc`).
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Impartial-culture profile, `N,M`.
    #[arg(long, value_name = "N,M")]
    pub random: Option<RandomSpec>,
}

impl ProfileSource {
    pub fn load(&self, seed: u64) -> Result<PreferenceProfile, CliError> {
        match (&self.profile, self.random) {
            (Some(path), _) => load_profile(path),
            (None, Some(spec)) => spec.sample(derive_seed(seed, &[b"profile"])),
            (None, None) => Err(CliError::invalid("give --profile or --random")),
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Voters per profile.
    #[arg(long)]
    pub n: usize,
    /// Candidates per profile.
    #[arg(long)]
    pub m: usize,
    /// Number of profiles.
    #[arg(long, default_value_t = 1)]
    pub count: usize,
}

pub(crate) fn gen_profiles(ctx: &Context, args: GenArgs) -> Result<(), CliError> {
    let spec =
        RandomSpec::from_str(&format!("{},{}", args.n, args.m)).map_err(CliError::invalid)?;
    if args.count == 0 {
        return Err(CliError::invalid("--count must be at least 1"));
    }
    let profiles = (0..args.count)
        .map(|i| spec.sample(derive_seed(ctx.seed, &[b"gen", &(i as u64).to_le_bytes()])))
        .collect::<Result<Vec<_>, _>>()?;
    match &ctx.out {
        Some(dir) => {
            for (i, p) in profiles.iter().enumerate() {
                let (ext, body) = match ctx.format {
                    Format::Text => ("toml", profile_to_toml(p)),
                    Format::Json => ("json", crate::to_json(&ProfileFile::of(p))),
                };
                write_file(&dir.join(format!("profile-{i:03}.{ext}")), &body)?;
            }
            Ok(())
        }
        None => {
            let text = match ctx.format {
                Format::Text => profiles
                    .iter()
                    .map(profile_to_toml)
                    .collect::<Vec<_>>()
                    .join("\n"),
                Format::Json => {
                    crate::to_json(&profiles.iter().map(ProfileFile::of).collect::<Vec<_>>())
                }
            };
            ctx.emit(&text)
        }
    }
}
