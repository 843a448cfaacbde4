//! Prediction and ranking shared by the `predict`/`rank` commands and the
//! HTTP handlers.

use std::path::PathBuf;

use serde::Serialize;
use tubepulse_core::model::ModelError;
use tubepulse_core::request::VideoRequest;
use tubepulse_core::trendrank::{match_score, rank_score, TopicSimilarity, TrendError};
use tubepulse_core::{EmbeddingTable, FeatureError, ProfileKind, RegressionModel, TrendingTopics};

use crate::failure::{CmdResult, Failure};

/// Topics reported per ranked draft.
pub const TOP_TOPICS: usize = 5;

/// Loaded models, at most one per profile kind.
#[derive(Debug, Clone, Default)]
pub struct ModelSet {
    models: Vec<RegressionModel>,
}

#[derive(Debug)]
pub enum PredictError {
    /// No loaded model serves the request's profile.
    NoModel {
        requested: ProfileKind,
        loaded: Vec<String>,
    },
    Feature(FeatureError),
    Model(ModelError),
}

impl std::fmt::Display for PredictError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PredictError::NoModel { requested, loaded } if loaded.is_empty() => {
                write!(f, "request needs a {requested} model but no model is loaded")
            }
            PredictError::NoModel { requested, loaded } => {
                write!(f, "request needs a {requested} model; loaded: {}", loaded.join(", "))
            }
            PredictError::Feature(e) => e.fmt(f),
            PredictError::Model(e) => e.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    /// Rounded half-up for display.
    pub predicted_views: u64,
    pub predicted_views_raw: f64,
    pub profile_used: String,
    pub model_version: String,
}

pub fn round_half_up(v: f64) -> u64 {
    (v + 0.5).floor() as u64
}

impl ModelSet {
    pub fn new(models: Vec<RegressionModel>) -> Result<Self, String> {
        for (i, m) in models.iter().enumerate() {
            if let Some(other) = models[..i].iter().find(|o| o.profile.kind == m.profile.kind) {
                return Err(format!(
                    "two models for profile {}: {} and {}",
                    m.profile.kind,
                    other.version(),
                    m.version()
                ));
            }
        }
        Ok(ModelSet { models })
    }

    pub fn load(paths: &[PathBuf]) -> CmdResult<Self> {
        let mut models = Vec::with_capacity(paths.len());
        for p in paths {
            models.push(RegressionModel::load_file(p).map_err(|e| Failure::io(p, e))?);
        }
        ModelSet::new(models).map_err(Failure::usage)
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &RegressionModel> {
        self.models.iter()
    }

    pub fn get(&self, kind: ProfileKind) -> Option<&RegressionModel> {
        self.models.iter().find(|m| m.profile.kind == kind)
    }

    pub fn profiles(&self) -> Vec<String> {
        self.models.iter().map(|m| m.profile.id()).collect()
    }

    pub fn predict(&self, req: &VideoRequest) -> Result<Prediction, PredictError> {
        let kind = req.profile_kind();
        let model = self.get(kind).ok_or_else(|| PredictError::NoModel {
            requested: kind,
            loaded: self.profiles(),
        })?;
        let fv = model
            .featurizer()
            .featurize_facts(req.facts(), req.as_of)
            .map_err(PredictError::Feature)?;
        let raw = model.predict(&fv).map_err(PredictError::Model)?;
        Ok(Prediction {
            predicted_views: round_half_up(raw),
            predicted_views_raw: raw,
            profile_used: model.profile.id(),
            model_version: model.version(),
        })
    }
}

/// One ranked draft, the body of a rank response.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankResponse {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub predicted_views: u64,
    pub predicted_views_raw: f64,
    pub match_score: f64,
    pub best_topic: Option<String>,
    pub top_topics: Vec<TopicSimilarity>,
    pub rank_score: f64,
    pub boost_factor: f64,
    pub unscorable: bool,
    pub skipped_oov_tokens: Vec<String>,
    pub profile_used: String,
    pub model_version: String,
}

/// Everything ranking needs besides the models.
pub struct TrendContext<'a> {
    pub table: &'a EmbeddingTable,
    pub topics: &'a TrendingTopics,
    pub beta: f64,
}

pub fn rank_prediction(
    req: &VideoRequest,
    prediction: Prediction,
    ctx: &TrendContext<'_>,
) -> Result<RankResponse, TrendError> {
    let m = match_score(&req.draft(), &ctx.topics.topics, ctx.table)?;
    let report = rank_score(prediction.predicted_views_raw, m, ctx.beta)?;
    let m = report.match_report;
    Ok(RankResponse {
        id: req.id.clone(),
        predicted_views: prediction.predicted_views,
        predicted_views_raw: prediction.predicted_views_raw,
        match_score: m.match_score,
        best_topic: m.best_topic.clone(),
        top_topics: m.top(TOP_TOPICS).to_vec(),
        rank_score: report.rank_score,
        boost_factor: report.boost_factor,
        unscorable: m.unscorable,
        skipped_oov_tokens: m.skipped_oov_tokens,
        profile_used: prediction.profile_used,
        model_version: prediction.model_version,
    })
}
