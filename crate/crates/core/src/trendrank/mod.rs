//! Trending-topic matching over static word embeddings, and the boosted
//! rank score built on it.

mod embedding;
mod text;
mod topics;

use serde::Serialize;
use thiserror::Error;

pub use embedding::{cosine, load_embeddings, load_embeddings_file, EmbeddingTable, LoadWarnings, NORMALIZATION};
pub use text::{keyword_text, phrase_vector, tokenize, Draft, PhraseVector, STOPWORDS};
pub use topics::{load_topics, parse_topics, TrendingTopics, DEFAULT_MAX_TOPICS};

pub const DEFAULT_BETA: f64 = 0.5;

#[derive(Debug, Error)]
pub enum TrendError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicSimilarity {
    pub topic: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchReport {
    /// Scored topics, most similar first. Topics without a vector are absent.
    pub per_topic: Vec<TopicSimilarity>,
    pub match_score: f64,
    pub best_topic: Option<String>,
    pub skipped_oov_tokens: Vec<String>,
    /// Topics with no in-vocabulary token.
    pub skipped_topics: Vec<String>,
    pub unscorable: bool,
}

impl MatchReport {
    pub fn top(&self, k: usize) -> &[TopicSimilarity] {
        &self.per_topic[..k.min(self.per_topic.len())]
    }
}

/// Scores a draft against every topic and keeps the best cosine, clamped
/// to [0, 1].
pub fn match_score<S: AsRef<str>>(
    draft: &Draft,
    topics: &[S],
    table: &EmbeddingTable,
) -> Result<MatchReport, TrendError> {
    if topics.is_empty() {
        return Err(TrendError::Param("topic list is empty".into()));
    }
    let draft_vec = phrase_vector(&keyword_text(draft), table);
    let mut report = MatchReport {
        per_topic: Vec::new(),
        match_score: 0.0,
        best_topic: None,
        skipped_oov_tokens: draft_vec.oov_tokens,
        skipped_topics: Vec::new(),
        unscorable: true,
    };
    let Some(v) = draft_vec.vector else {
        return Ok(report);
    };
    for topic in topics {
        let topic = topic.as_ref();
        match phrase_vector(topic, table).vector {
            Some(t) => report.per_topic.push(TopicSimilarity {
                topic: topic.to_string(),
                similarity: cosine(&v, &t)?,
            }),
            None => report.skipped_topics.push(topic.to_string()),
        }
    }
    // Stable: equal similarities keep list order.
    report.per_topic.sort_by(|a, b| b.similarity.total_cmp(&a.similarity));
    if let Some(best) = report.per_topic.first() {
        report.match_score = best.similarity.clamp(0.0, 1.0);
        report.best_topic = Some(best.topic.clone());
        report.unscorable = false;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankReport {
    pub predicted_views: f64,
    #[serde(rename = "match")]
    pub match_report: MatchReport,
    pub rank_score: f64,
    pub boost_factor: f64,
}

/// `predicted_views * (1 + beta * match_score)`.
pub fn rank_score(predicted_views: f64, m: MatchReport, beta: f64) -> Result<RankReport, TrendError> {
    if !(predicted_views.is_finite() && predicted_views >= 0.0) {
        return Err(TrendError::Param(format!(
            "predicted views must be finite and non-negative, got {predicted_views}"
        )));
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(TrendError::Param(format!(
            "beta must be finite and non-negative, got {beta}"
        )));
    }
    let rank = predicted_views * (1.0 + beta * m.match_score);
    Ok(RankReport {
        predicted_views,
        match_report: m,
        rank_score: rank,
        boost_factor: beta,
    })
}
