use serde_json::Value;
use tubepulse_core::request::PredictRequest;
use tubepulse_core::trendrank::DEFAULT_MAX_TOPICS;

use super::{beta, json_pretty, load_table, load_topic_file, model_paths, read_input, trend_paths, write_out, Io};
use crate::args::RankArgs;
use crate::config::Config;
use crate::failure::{CmdResult, Failure};
use crate::service::{rank_prediction, ModelSet, RankResponse, TrendContext};

fn render(ranked: &[RankResponse]) -> String {
    let mut s = format!(
        "{:<4} {:<20} {:>15} {:>7} {:<20} {:>15}\n",
        "#", "Draft", "Predicted views", "Match", "Best topic", "Rank score"
    );
    for (i, r) in ranked.iter().enumerate() {
        s += &format!(
            "{:<4} {:<20} {:>15} {:>7.3} {:<20} {:>15.1}\n",
            i + 1,
            r.id.as_deref().unwrap_or("-"),
            r.predicted_views,
            r.match_score,
            r.best_topic.as_deref().unwrap_or("-"),
            r.rank_score
        );
    }
    s
}

pub fn run(args: &RankArgs, config: &Config, io: &mut Io<'_>) -> CmdResult {
    let paths = model_paths(&args.models, config)?;
    if paths.is_empty() {
        return Err(Failure::usage(
            "no model given (pass --model or set models in the config)",
        ));
    }
    let (emb_path, topics_path) = trend_paths(&args.trend, config);
    let emb_path = emb_path.ok_or_else(|| Failure::usage("no embeddings file (pass --embeddings)"))?;
    let topics_path = topics_path.ok_or_else(|| Failure::usage("no topics file (pass --topics)"))?;
    let beta = beta(&args.trend, config)?;

    let text = read_input(&args.drafts, io)?;
    let items: Vec<Value> = serde_json::from_str(&text).map_err(|e| {
        Failure::usage(format!(
            "{}: expected a JSON array of drafts: {e}",
            args.drafts.display()
        ))
    })?;
    if items.is_empty() {
        return Err(Failure::domain("no drafts"));
    }
    let mut requests = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let label = |e: &dyn std::fmt::Display| {
            let id = item.get("id").and_then(Value::as_str).unwrap_or("");
            Failure::domain(format!("draft {} {id}: {e}", i + 1))
        };
        let req = PredictRequest::from_json(&item.to_string()).map_err(|e| label(&e))?;
        let mut req = req.validate(None).map_err(|e| label(&e))?;
        req.id.get_or_insert_with(|| format!("draft-{}", i + 1));
        requests.push(req);
    }

    let models = ModelSet::load(&paths)?;
    let table = load_table(&emb_path)?;
    let topics = load_topic_file(&topics_path, config.server.max_topics.unwrap_or(DEFAULT_MAX_TOPICS))?;
    if topics.is_empty() {
        return Err(Failure::domain(format!(
            "{}: topic list is empty",
            topics_path.display()
        )));
    }
    let ctx = TrendContext {
        table: &table,
        topics: &topics,
        beta,
    };
    let mut ranked = Vec::with_capacity(requests.len());
    for req in &requests {
        let id = req.id.as_deref().unwrap_or_default();
        let p = models.predict(req).map_err(|e| Failure::domain(format!("{id}: {e}")))?;
        ranked.push(rank_prediction(req, p, &ctx).map_err(|e| Failure::domain(format!("{id}: {e}")))?);
    }
    // Stable: ties keep input order.
    ranked.sort_by(|a, b| b.rank_score.total_cmp(&a.rank_score));
    write_out(
        io,
        &if args.json {
            json_pretty(&ranked)
        } else {
            render(&ranked)
        },
    )
}
