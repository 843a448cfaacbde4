//! The JSON description of a video to score, shared by the HTTP service
//! and the command line.

use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::features::{ProfileKind, VideoFacts};
use crate::ingest::parse_timestamp;
use crate::trendrank::Draft;

/// One problem with one request field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    fn new(field: &str, message: impl Into<String>) -> Self {
        FieldError {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

/// Every field problem found in a request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestError {
    pub errors: Vec<FieldError>,
}

impl RequestError {
    pub fn fields(&self) -> Vec<&str> {
        self.errors.iter().map(|e| e.field.as_str()).collect()
    }
}

impl fmt::Display for RequestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .errors
            .iter()
            .map(|e| format!("{}: {}", e.field, e.message))
            .collect();
        write!(f, "invalid request: {}", parts.join("; "))
    }
}

impl std::error::Error for RequestError {}

/// Request body as received. Every field is optional at this stage so
/// that missing fields are reported together with the other problems.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default)]
    pub title: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub tags: Option<Vec<String>>,
    #[serde(default)]
    pub category_id: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_title: Option<String>,
    #[serde(default)]
    pub published_at: Option<String>,
    #[serde(default)]
    pub as_of: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comments_disabled: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratings_disabled: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub likes: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dislikes: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment_count: Option<u64>,
}

/// A request that passed validation.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoRequest {
    pub id: Option<String>,
    pub title: String,
    pub description: String,
    pub tags: Vec<String>,
    pub category_id: u32,
    pub channel_title: Option<String>,
    pub published_at: DateTime<Utc>,
    pub as_of: DateTime<Utc>,
    pub comments_disabled: bool,
    pub ratings_disabled: bool,
    /// Likes, dislikes and comment count, present only when all three were given.
    pub engagement: Option<(u64, u64, u64)>,
}

impl PredictRequest {
    /// Parses JSON, naming the offending field on type errors.
    pub fn from_json(text: &str) -> Result<Self, RequestError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "body".to_string() } else { path };
            RequestError {
                errors: vec![FieldError {
                    field,
                    message: e.into_inner().to_string(),
                }],
            }
        })
    }

    /// Checks required fields and timestamp order. `default_as_of` fills a
    /// missing `as_of`; without it `as_of` is required.
    pub fn validate(&self, default_as_of: Option<DateTime<Utc>>) -> Result<VideoRequest, RequestError> {
        let mut errors = Vec::new();
        let title = match self.title.as_deref().map(str::trim) {
            Some(t) if !t.is_empty() => t.to_string(),
            Some(_) => {
                errors.push(FieldError::new("title", "must not be empty"));
                String::new()
            }
            None => {
                errors.push(FieldError::new("title", "is required"));
                String::new()
            }
        };
        if self.category_id.is_none() {
            errors.push(FieldError::new("category_id", "is required"));
        }
        let timestamp = |field: &str, raw: Option<&str>, errors: &mut Vec<FieldError>| match raw {
            Some(raw) => match parse_timestamp(raw) {
                Ok(ts) => Some(ts),
                Err(e) => {
                    errors.push(FieldError::new(field, e.to_string()));
                    None
                }
            },
            None => None,
        };
        let published_at = timestamp("published_at", self.published_at.as_deref(), &mut errors);
        if self.published_at.is_none() {
            errors.push(FieldError::new("published_at", "is required"));
        }
        let as_of = match self.as_of.as_deref() {
            Some(raw) => timestamp("as_of", Some(raw), &mut errors),
            None if default_as_of.is_some() => default_as_of,
            None => {
                errors.push(FieldError::new("as_of", "is required"));
                None
            }
        };
        if let (Some(p), Some(a)) = (published_at, as_of) {
            if a < p {
                let msg = format!("as_of {} precedes published_at {}", a.to_rfc3339(), p.to_rfc3339());
                errors.push(FieldError::new("as_of", msg.clone()));
                errors.push(FieldError::new("published_at", msg));
            }
        }
        if !errors.is_empty() {
            return Err(RequestError { errors });
        }
        let engagement = match (self.likes, self.dislikes, self.comment_count) {
            (Some(l), Some(d), Some(c)) => Some((l, d, c)),
            _ => None,
        };
        Ok(VideoRequest {
            id: self.id.clone(),
            title,
            description: self.description.clone().unwrap_or_default(),
            tags: self
                .tags
                .iter()
                .flatten()
                .map(|t| t.trim())
                .filter(|t| !t.is_empty())
                .map(str::to_string)
                .collect(),
            category_id: self.category_id.expect("checked above"),
            channel_title: self.channel_title.clone(),
            published_at: published_at.expect("checked above"),
            as_of: as_of.expect("checked above"),
            comments_disabled: self.comments_disabled.unwrap_or(false),
            ratings_disabled: self.ratings_disabled.unwrap_or(false),
            engagement,
        })
    }
}

impl VideoRequest {
    /// Post-upload when every engagement counter is present.
    pub fn profile_kind(&self) -> ProfileKind {
        if self.engagement.is_some() {
            ProfileKind::PostUpload
        } else {
            ProfileKind::PreUpload
        }
    }

    pub fn facts(&self) -> VideoFacts<'_> {
        VideoFacts {
            title: &self.title,
            description: &self.description,
            tag_count: self.tags.len(),
            category_id: self.category_id,
            channel_title: self.channel_title.as_deref(),
            published_at: self.published_at,
            comments_disabled: self.comments_disabled,
            ratings_disabled: self.ratings_disabled,
            likes: self.engagement.map(|e| e.0),
            dislikes: self.engagement.map(|e| e.1),
            comment_count: self.engagement.map(|e| e.2),
            view_count: None,
        }
    }

    pub fn draft(&self) -> Draft {
        Draft {
            title: self.title.clone(),
            tags: self.tags.clone(),
            description: self.description.clone(),
        }
    }
}
