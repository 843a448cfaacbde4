//! View-count prediction and trending-topic ranking for video metadata.
//!
//! The pipeline runs `ingest` → `eda` → `features` → `trees` → `eval`,
//! with `model` wrapping a fitted ensemble and its feature profile for
//! persistence, and `trendrank` boosting predictions by similarity to a
//! trending-topic list.

pub mod eda;
pub mod eval;
pub mod features;
pub mod ingest;
pub mod model;
pub mod request;
pub mod synth;
pub mod trees;
pub mod trendrank;

pub use eda::{CorrelationMatrix, EdaError, NumericColumn, OutlierReport};
pub use eval::{EvalError, Metrics, ScoreReport, SplitIndices};
pub use features::{
    ChannelFrequency, FeatureError, FeatureMatrix, FeatureProfile, FeatureVector, Featurizer, ProfileKind,
};
pub use ingest::{IngestError, IngestReport, VideoRecord};
pub use model::{ModelError, ModelKind, ModelSpec, RegressionModel, TargetTransform};
pub use request::{FieldError, PredictRequest, RequestError, VideoRequest};
pub use trees::{BoostParams, ForestParams, Matrix, TreeError, TreeParams};
pub use trendrank::{Draft, EmbeddingTable, MatchReport, RankReport, TrendError, TrendingTopics};
