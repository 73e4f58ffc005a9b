use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use cud_core::{Candidates, Preference, PreferenceProfile};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::GameError;

/// Who occupies the seats that humans did not take.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillMode {
    /// Starts once `start_humans` have joined; free seats get lazy bots.
    #[default]
    Mixed,
    /// Starts when every seat holds a human.
    HumanOnly,
    /// Starts at once with a bot in every seat.
    BotOnly,
}

impl std::str::FromStr for FillMode {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "mixed" => Ok(FillMode::Mixed),
            "human_only" | "humans" => Ok(FillMode::HumanOnly),
            "bot_only" | "bots" => Ok(FillMode::BotOnly),
            other => Err(GameError::Config(format!(
                "unknown bot fill {other:?} (mixed|human_only|bot_only)"
            ))),
        }
    }
}

/// Where seat preferences come from.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreferencePool {
    /// Every strict order over the cards, uniformly.
    #[default]
    ImpartialCulture,
    /// A fixed list of orders (by card name); each seat draws one uniformly.
    Orders(Vec<Vec<String>>),
    /// Seat `i` gets order `i` exactly; needs one order per seat.
    Fixed(Vec<Vec<String>>),
}

/// Parameters of one game.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SessionConfig {
    pub seats: usize,
    /// Number of rounds (the deadline τ).
    pub tau: u32,
    pub round_seconds: u64,
    pub fill: FillMode,
    /// Humans needed before a mixed game starts; defaults to `seats − 2`.
    pub start_humans: Option<usize>,
    pub cards: Vec<String>,
    pub pool: PreferencePool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            seats: 8,
            tau: 10,
            round_seconds: 15,
            fill: FillMode::Mixed,
            start_humans: None,
            cards: ["penguin", "racoon", "boar", "owl", "fox"]
                .map(String::from)
                .to_vec(),
            pool: PreferencePool::ImpartialCulture,
        }
    }
}

impl SessionConfig {
    pub fn bot_only(seats: usize, tau: u32) -> Self {
        SessionConfig {
            seats,
            tau,
            fill: FillMode::BotOnly,
            ..Self::default()
        }
    }

    pub fn candidates(&self) -> Result<Candidates, GameError> {
        Ok(Candidates::with_default(
            self.cards.iter().cloned(),
            "no consensus",
        )?)
    }

    /// Humans that must be seated before the game starts.
    pub fn humans_needed(&self) -> usize {
        match self.fill {
            FillMode::Mixed => self
                .start_humans
                .unwrap_or(self.seats.saturating_sub(2))
                .clamp(1, self.seats),
            FillMode::HumanOnly => self.seats,
            FillMode::BotOnly => 0,
        }
    }

    pub fn validate(&self) -> Result<(), GameError> {
        let bad = |msg: String| Err(GameError::Config(msg));
        if self.seats == 0 {
            return bad("seats must be at least 1".into());
        }
        if self.tau == 0 {
            return bad("tau must be at least 1 round".into());
        }
        if self.round_seconds == 0 {
            return bad("round_seconds must be at least 1".into());
        }
        if self.cards.len() < 2 {
            return bad("at least two cards are needed".into());
        }
        if let Some(h) = self.start_humans {
            if h > self.seats {
                return bad(format!("start_humans {h} exceeds {} seats", self.seats));
            }
        }
        let candidates = self.candidates()?;
        match &self.pool {
            PreferencePool::ImpartialCulture => {}
            PreferencePool::Orders(orders) if orders.is_empty() => {
                return bad("preference pool is empty".into())
            }
            PreferencePool::Fixed(orders) if orders.len() != self.seats => {
                return bad(format!(
                    "fixed pool lists {} orders for {} seats",
                    orders.len(),
                    self.seats
                ))
            }
            PreferencePool::Orders(orders) | PreferencePool::Fixed(orders) => {
                for order in orders {
                    parse_order(&candidates, order)?;
                }
            }
        }
        Ok(())
    }

    /// Draws one preference per seat from the pool.
    pub fn draw_preferences(
        &self,
        n: usize,
        rng: &mut impl Rng,
    ) -> Result<Vec<Preference>, GameError> {
        let candidates = self.candidates()?;
        let m = candidates.len();
        match &self.pool {
            PreferencePool::ImpartialCulture => Ok((0..n)
                .map(|_| {
                    let mut order: Vec<usize> = (0..m).collect();
                    order.shuffle(rng);
                    Preference::from_indices(&order).expect("shuffle is a permutation")
                })
                .collect()),
            PreferencePool::Orders(orders) => (0..n)
                .map(|_| parse_order(&candidates, &orders[rng.random_range(0..orders.len())]))
                .collect(),
            PreferencePool::Fixed(orders) => {
                if orders.len() != n {
                    return Err(GameError::Config(format!(
                        "fixed pool lists {} orders for {n} seats",
                        orders.len()
                    )));
                }
                orders.iter().map(|o| parse_order(&candidates, o)).collect()
            }
        }
    }

    /// A fixed pool built from a profile's rankings, one per seat.
    pub fn fixed_profile(profile: &PreferenceProfile) -> Self {
        let names = profile.candidates();
        let orders = profile
            .voters()
            .iter()
            .map(|p| {
                p.order()
                    .iter()
                    .map(|&c| names.name(c).to_string())
                    .collect()
            })
            .collect();
        SessionConfig {
            seats: profile.n(),
            cards: names.names().to_vec(),
            pool: PreferencePool::Fixed(orders),
            ..Self::default()
        }
    }
}

fn parse_order(candidates: &Candidates, order: &[String]) -> Result<Preference, GameError> {
    let ranked = order
        .iter()
        .map(|name| candidates.lookup(name))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Preference::new(ranked, candidates.len())?)
}

/// Server-wide settings plus the defaults for newly created sessions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ServerConfig {
    pub listen: SocketAddr,
    pub storage: PathBuf,
    pub static_dir: Option<PathBuf>,
    /// Games a player may join in total; `None` for no limit.
    pub max_games_per_player: Option<u32>,
    /// Master seed for session seeds; fresh entropy when absent.
    pub seed: Option<u64>,
    pub session: SessionConfig,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            storage: PathBuf::from("cud-data"),
            static_dir: None,
            max_games_per_player: Some(15),
            seed: None,
            session: SessionConfig::default(),
        }
    }
}

impl ServerConfig {
    pub fn from_toml(text: &str) -> Result<Self, GameError> {
        let config: ServerConfig = toml::from_str(text)?;
        config.session.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, GameError> {
        let text = std::fs::read_to_string(path).map_err(|e| GameError::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Applies `CUD_SEATS`, `CUD_TAU`, `CUD_ROUND_SECONDS`, `CUD_BOT_FILL`,
    /// `CUD_STORAGE` and `CUD_LISTEN` from the given variables.
    pub fn apply_env<K, V>(
        &mut self,
        vars: impl IntoIterator<Item = (K, V)>,
    ) -> Result<(), GameError>
    where
        K: AsRef<str>,
        V: AsRef<str>,
    {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, GameError> {
            value
                .trim()
                .parse()
                .map_err(|_| GameError::Config(format!("{key}={value:?} is not a number")))
        }
        for (key, value) in vars {
            let (key, value) = (key.as_ref(), value.as_ref());
            match key {
                "CUD_SEATS" => self.session.seats = num(key, value)?,
                "CUD_TAU" => self.session.tau = num(key, value)?,
                "CUD_ROUND_SECONDS" => self.session.round_seconds = num(key, value)?,
                "CUD_BOT_FILL" => self.session.fill = value.parse()?,
                "CUD_STORAGE" => self.storage = PathBuf::from(value),
                "CUD_LISTEN" => {
                    self.listen = value.parse().map_err(|_| {
                        GameError::Config(format!("CUD_LISTEN={value:?} is not host:port"))
                    })?
                }
                _ => {}
            }
        }
        self.session.validate()
    }

    pub fn from_env(&mut self) -> Result<(), GameError> {
        self.apply_env(std::env::vars())
    }
}
