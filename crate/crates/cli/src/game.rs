use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use clap::Args;
use cud_game::server::{serve as serve_http, AppState};
use cud_game::{FileStore, GameMetrics, GameSession, LogRecord, ServerConfig};

use crate::{to_json, CliError, Context, Format};

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Server config (TOML); `CUD_*` environment variables override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub listen: Option<SocketAddr>,
    /// Directory with the built web client.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
}

pub(crate) fn serve(ctx: &Context, args: ServeArgs) -> Result<(), CliError> {
    let mut config = match &args.config {
        Some(path) => ServerConfig::load(path)?,
        None => ServerConfig::default(),
    };
    config.from_env()?;
    if let Some(l) = args.listen {
        config.listen = l;
    }
    if let Some(dir) = &ctx.out {
        config.storage = dir.clone();
    }
    if let Some(dir) = args.static_dir {
        config.static_dir = Some(dir);
    }
    if ctx.seed_given {
        config.seed = Some(ctx.seed);
    }
    config.session.validate()?;
    let store = FileStore::open(&config.storage)?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::io("tokio runtime", e))?;
    let state = AppState::new(config, Arc::new(store));
    runtime.block_on(serve_http(state))?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Session event log (one JSON record per line).
    #[arg(long)]
    pub log: PathBuf,
}

pub fn read_log(path: &std::path::Path) -> Result<Vec<LogRecord>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| CliError::Invariant(format!("event log line {}: {e}", i + 1)))
        })
        .collect()
}

fn render_metrics(id: &str, m: &GameMetrics, session: &GameSession) -> String {
    let names = session.candidates();
    format!(
        "session {id}\nconverged: {}\nwinner: {}\nrounds used: {}\nvote changes: {}\naverage reward: {:.2}\nprice of reality: {}\nhuman actions: {} (OA {}, IA {}, flagged {})\n",
        m.converged,
        m.winner.map_or(names.default_name(), |w| names.name(w)),
        m.rounds_used,
        m.vote_changes,
        m.avg_reward_points,
        m.por.map_or("n/a".into(), |p| p.to_string()),
        m.human_actions,
        m.irrational.oa,
        m.irrational.ia,
        m.irrational.flagged_actions,
    )
}

pub(crate) fn replay(ctx: &Context, args: ReplayArgs) -> Result<(), CliError> {
    let records = read_log(&args.log)?;
    let session = GameSession::replay(&records)?;
    let metrics = session
        .metrics()
        .cloned()
        .ok_or(cud_game::GameError::Truncated)?;
    let text = match ctx.format {
        Format::Json => to_json(&metrics),
        Format::Text => render_metrics(session.id(), &metrics, &session),
    };
    ctx.emit(&text)
}
