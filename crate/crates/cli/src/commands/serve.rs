use std::sync::Arc;

use tubepulse_core::trendrank::DEFAULT_MAX_TOPICS;

use super::{beta, load_table, load_topic_file, model_paths, trend_paths};
use crate::args::ServeArgs;
use crate::config::Config;
use crate::failure::{CmdResult, Failure};
use crate::server::{self, AppState, ServerOptions, DEFAULT_HOST, DEFAULT_MAX_CONCURRENCY, DEFAULT_PORT};
use crate::service::ModelSet;

pub fn run(args: &ServeArgs, config: &Config) -> CmdResult {
    let srv = &config.server;
    let models = ModelSet::load(&model_paths(&args.models, config)?)?;
    if models.is_empty() {
        log::warn!("no model loaded; /api/predict and /api/rank will answer 409");
    }
    let (emb_path, topics_path) = trend_paths(&args.trend, config);
    let embeddings = emb_path.as_deref().map(load_table).transpose()?;
    let max_topics = srv.max_topics.unwrap_or(DEFAULT_MAX_TOPICS);
    let topics = topics_path
        .as_deref()
        .map(|p| load_topic_file(p, max_topics))
        .transpose()?;
    if embeddings.is_none() || topics.is_none() {
        log::warn!("embeddings or topics missing; /api/rank will answer 503");
    }
    let mut options = ServerOptions {
        beta: beta(&args.trend, config)?,
        max_concurrency: args
            .max_concurrency
            .or(srv.max_concurrency)
            .unwrap_or(DEFAULT_MAX_CONCURRENCY),
        max_topics,
        topics_path,
        token: srv.token.clone(),
        admin_token: srv.admin_token.clone(),
        ..ServerOptions::default()
    };
    if let Some(origins) = &srv.cors_origins {
        options.cors_origins = origins.clone();
    }
    let state = Arc::new(AppState::new(models, embeddings, topics, options));
    let host = args
        .host
        .clone()
        .or_else(|| srv.host.clone())
        .unwrap_or(DEFAULT_HOST.into());
    let port = args.port.or(srv.port).unwrap_or(DEFAULT_PORT);

    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::usage(format!("starting runtime: {e}")))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind((host.as_str(), port))
            .await
            .map_err(|e| Failure::domain(format!("cannot listen on {host}:{port}: {e}")))?;
        let addr = listener.local_addr().map_err(|e| Failure::domain(e.to_string()))?;
        log::info!("listening on http://{addr}");
        server::serve(listener, state)
            .await
            .map_err(|e| Failure::domain(format!("server stopped: {e}")))
    })
}
