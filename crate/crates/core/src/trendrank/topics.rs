use std::fs;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::Serialize;

use super::TrendError;
use crate::ingest::parse_timestamp;

/// Most topics kept from a list file.
pub const DEFAULT_MAX_TOPICS: usize = 100;

const FETCHED_PREFIX: &str = "fetched:";

/// A snapshot of trending phrases.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendingTopics {
    pub topics: Vec<String>,
    pub fetched_at: DateTime<Utc>,
    pub source: String,
    /// Lines dropped past the cap.
    #[serde(skip_serializing_if = "is_zero")]
    pub truncated: usize,
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

impl TrendingTopics {
    pub fn new(topics: Vec<String>, fetched_at: DateTime<Utc>, source: impl Into<String>) -> Self {
        TrendingTopics {
            topics,
            fetched_at,
            source: source.into(),
            truncated: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.topics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }
}

/// Parses a topic list: one phrase per line, blank lines and `#` comments
/// ignored. A `# fetched: <timestamp>` comment overrides `default_fetched`.
pub fn parse_topics(
    text: &str,
    default_fetched: DateTime<Utc>,
    source: impl Into<String>,
    max_topics: usize,
) -> Result<TrendingTopics, TrendError> {
    let mut fetched_at = None;
    let mut topics = Vec::new();
    let mut truncated = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(ts) = comment.strip_prefix(FETCHED_PREFIX) {
                if fetched_at.is_none() {
                    let parsed = parse_timestamp(ts.trim()).map_err(|e| TrendError::Format {
                        line: i + 1,
                        message: e.to_string(),
                    })?;
                    fetched_at = Some(parsed);
                }
            }
            continue;
        }
        if topics.len() < max_topics {
            topics.push(line.to_string());
        } else {
            truncated += 1;
        }
    }
    if truncated > 0 {
        log::warn!("topics: kept {max_topics}, dropped {truncated}");
    }
    Ok(TrendingTopics {
        topics,
        fetched_at: fetched_at.unwrap_or(default_fetched),
        source: source.into(),
        truncated,
    })
}

/// Reads a topic list file. Without a `# fetched:` header the file's
/// modification time is used.
pub fn load_topics(path: impl AsRef<Path>, max_topics: usize) -> Result<TrendingTopics, TrendError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mtime: DateTime<Utc> = fs::metadata(path)?.modified()?.into();
    let mtime = DateTime::from_timestamp(mtime.timestamp(), 0).unwrap_or(mtime);
    parse_topics(&text, mtime, path.display().to_string(), max_topics)
}
