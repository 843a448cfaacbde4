//! Trained regressors bound to a feature profile and target transform,
//! plus their on-disk format.
//!
//! A model file is a single JSON object:
//!
//! ```text
//! {"magic":"tubepulse-model","format_version":1,"checksum":"sha256:<hex>","model":{...}}
//! ```
//!
//! The checksum covers the exact bytes of the `model` value. Loading checks
//! magic, then version, then checksum, so a truncated or edited file never
//! yields a partially usable model.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::features::{ChannelFrequency, FeatureError, FeatureMatrix, FeatureProfile, FeatureVector, Featurizer};
use crate::trees::{
    fit_boosted, fit_forest, fit_tree, BoostParams, BoostedTrees, Forest, ForestParams, Matrix, Tree, TreeError,
    TreeParams,
};

pub const MODEL_MAGIC: &str = "tubepulse-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("profile mismatch: model expects {model}, input is {input}")]
    ProfileMismatch { model: String, input: String },
    #[error("profile uses the channel column but no channel counts were supplied")]
    MissingChannels,
    #[error("model produced a non-finite prediction")]
    NonFinite,
    #[error("model I/O failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a model file (bad magic)")]
    NotAModel,
    #[error("unsupported model format version {found} (this build reads version {expected})")]
    Version { found: u32, expected: u32 },
    #[error("model file is corrupt or truncated: {0}")]
    Corrupt(String),
    #[error("model checksum mismatch: file says {expected}, content hashes to {actual}")]
    Checksum { expected: String, actual: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Tree,
    Forest,
    Boosted,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Tree, ModelKind::Forest, ModelKind::Boosted];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Tree => "tree",
            ModelKind::Forest => "forest",
            ModelKind::Boosted => "boosted",
        }
    }

    /// Human label used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Tree => "Decision Tree",
            ModelKind::Forest => "Random Forest",
            ModelKind::Boosted => "Gradient Boosting",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Transform applied to view counts before training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetTransform {
    Log1p,
    Identity,
}

impl TargetTransform {
    pub fn forward(self, views: f64) -> f64 {
        match self {
            TargetTransform::Log1p => views.ln_1p(),
            TargetTransform::Identity => views,
        }
    }

    /// Back to view space, clamped at zero.
    pub fn inverse(self, value: f64) -> f64 {
        let v = match self {
            TargetTransform::Log1p => value.exp_m1(),
            TargetTransform::Identity => value,
        };
        v.max(0.0)
    }
}

/// Algorithm plus hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum ModelSpec {
    Tree(TreeParams),
    Forest(ForestParams),
    Boosted(BoostParams),
}

impl ModelSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Tree(_) => ModelKind::Tree,
            ModelSpec::Forest(_) => ModelKind::Forest,
            ModelSpec::Boosted(_) => ModelKind::Boosted,
        }
    }

    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Tree => ModelSpec::Tree(TreeParams::default()),
            ModelKind::Forest => ModelSpec::Forest(ForestParams::default()),
            ModelKind::Boosted => ModelSpec::Boosted(BoostParams::default()),
        }
    }

    /// Forest seed, the only randomness inside training.
    pub fn seed(&self) -> Option<u64> {
        match self {
            ModelSpec::Forest(p) => Some(p.seed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Payload {
    Tree(Tree),
    Forest(Forest),
    Boosted(BoostedTrees),
}

impl Payload {
    fn predict_row(&self, row: &[f64]) -> f64 {
        match self {
            Payload::Tree(t) => t.predict_row(row),
            Payload::Forest(f) => f.predict_row(row),
            Payload::Boosted(b) => b.predict_row(row),
        }
    }
}

/// How the training rows were selected, so a model can be re-scored on
/// the same partition later.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineMeta {
    pub split_ratio: f64,
    pub split_seed: u64,
    /// Outlier-filtered columns and Tukey multiplier, when filtering ran.
    pub outlier_columns: Vec<String>,
    pub outlier_k: Option<f64>,
    /// Fingerprint of the full featurized dataset before splitting.
    pub source_fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub spec: ModelSpec,
    pub n_rows: usize,
    /// SHA-256 over the training matrix, targets and column names.
    pub dataset_fingerprint: String,
    pub pipeline: Option<PipelineMeta>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel {
    pub kind: ModelKind,
    pub profile: FeatureProfile,
    pub transform: TargetTransform,
    pub channels: Option<ChannelFrequency>,
    pub training: TrainingMeta,
    pub payload: Payload,
}

/// Stable digest of a feature matrix.
pub fn fingerprint(data: &FeatureMatrix) -> String {
    let mut h = Sha256::new();
    for c in data.columns() {
        h.update(c.as_bytes());
        h.update([0u8]);
    }
    h.update((data.n_rows() as u64).to_le_bytes());
    for v in data.x.as_slice().iter().chain(&data.targets) {
        h.update(v.to_bits().to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// Fits `spec` on `data` in transformed target space.
pub fn train(
    spec: &ModelSpec,
    data: &FeatureMatrix,
    transform: TargetTransform,
    channels: Option<ChannelFrequency>,
) -> Result<RegressionModel, ModelError> {
    if data.profile.channel_frequency && channels.is_none() {
        return Err(ModelError::MissingChannels);
    }
    let y: Vec<f64> = data.targets.iter().map(|&v| transform.forward(v)).collect();
    let payload = fit_payload(spec, &data.x, &y)?;
    Ok(RegressionModel {
        kind: spec.kind(),
        profile: data.profile.clone(),
        transform,
        channels,
        training: TrainingMeta {
            spec: spec.clone(),
            n_rows: data.n_rows(),
            dataset_fingerprint: fingerprint(data),
            pipeline: None,
        },
        payload,
    })
}

/// Fits the raw payload on an already-transformed target.
pub fn fit_payload(spec: &ModelSpec, x: &Matrix, y: &[f64]) -> Result<Payload, TreeError> {
    Ok(match spec {
        ModelSpec::Tree(p) => Payload::Tree(fit_tree(x, y, p, None)?),
        ModelSpec::Forest(p) => Payload::Forest(fit_forest(x, y, p)?),
        ModelSpec::Boosted(p) => Payload::Boosted(fit_boosted(x, y, p)?),
    })
}

impl RegressionModel {
    /// Featurizer matching this model's profile and channel encoding.
    pub fn featurizer(&self) -> Featurizer {
        match &self.channels {
            Some(c) => Featurizer::with_channels(self.profile.clone(), c.clone()),
            None => Featurizer::new(self.profile.clone()),
        }
    }

    /// Prediction in transformed space for an already laid-out row.
    pub fn predict_transformed(&self, row: &[f64]) -> Result<f64, ModelError> {
        if row.len() != self.profile.width() {
            return Err(TreeError::Shape {
                expected: self.profile.width(),
                found: row.len(),
            }
            .into());
        }
        Ok(self.payload.predict_row(row))
    }

    /// Predicted views for a laid-out row.
    pub fn predict_row(&self, row: &[f64]) -> Result<f64, ModelError> {
        let v = self.transform.inverse(self.predict_transformed(row)?);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ModelError::NonFinite)
        }
    }

    /// Predicted view count for one feature vector.
    pub fn predict(&self, fv: &FeatureVector) -> Result<f64, ModelError> {
        let input_kind = fv.inferred_kind();
        if input_kind != self.profile.kind {
            let input = FeatureProfile::new(input_kind, self.profile.channel_frequency);
            return Err(ModelError::ProfileMismatch {
                model: self.profile.id(),
                input: input.id(),
            });
        }
        let row = fv.to_row(&self.profile)?;
        self.predict_row(&row)
    }

    /// Predictions for every row of `data`, in view space.
    pub fn predict_matrix(&self, data: &FeatureMatrix) -> Result<Vec<f64>, ModelError> {
        if data.profile.columns != self.profile.columns {
            return Err(ModelError::ProfileMismatch {
                model: self.profile.id(),
                input: data.profile.id(),
            });
        }
        data.x.rows().map(|r| self.predict_row(r)).collect()
    }

    fn body_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    /// `<kind>-<profile>-<first 12 hex digits of the checksum>`.
    pub fn version(&self) -> String {
        let digest = hex::encode(Sha256::digest(self.body_json().as_bytes()));
        format!("{}-{}-{}", self.kind, self.profile.kind, &digest[..12])
    }

    pub fn save<W: Write>(&self, mut sink: W) -> Result<(), ModelError> {
        let body = self.body_json();
        let checksum = hex::encode(Sha256::digest(body.as_bytes()));
        writeln!(
            sink,
            "{{\"magic\":\"{MODEL_MAGIC}\",\"format_version\":{FORMAT_VERSION},\"checksum\":\"sha256:{checksum}\",\"model\":{body}}}"
        )?;
        sink.flush()?;
        Ok(())
    }

    pub fn load<R: Read>(mut source: R) -> Result<Self, ModelError> {
        let mut text = String::new();
        source.read_to_string(&mut text).map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => ModelError::Corrupt("not UTF-8".into()),
            _ => ModelError::Io(e),
        })?;

        #[derive(Deserialize)]
        struct Header {
            magic: Option<String>,
            format_version: Option<u32>,
        }
        #[derive(Deserialize)]
        struct Envelope<'a> {
            checksum: String,
            #[serde(borrow)]
            model: &'a RawValue,
        }

        let header: Header = serde_json::from_str(&text).map_err(|e| ModelError::Corrupt(e.to_string()))?;
        if header.magic.as_deref() != Some(MODEL_MAGIC) {
            return Err(ModelError::NotAModel);
        }
        match header.format_version {
            Some(FORMAT_VERSION) => {}
            Some(found) => {
                return Err(ModelError::Version {
                    found,
                    expected: FORMAT_VERSION,
                })
            }
            None => return Err(ModelError::Corrupt("missing format_version".into())),
        }
        let envelope: Envelope<'_> = serde_json::from_str(&text).map_err(|e| ModelError::Corrupt(e.to_string()))?;
        let actual = format!(
            "sha256:{}",
            hex::encode(Sha256::digest(envelope.model.get().as_bytes()))
        );
        if actual != envelope.checksum {
            return Err(ModelError::Checksum {
                expected: envelope.checksum,
                actual,
            });
        }
        let model: RegressionModel =
            serde_json::from_str(envelope.model.get()).map_err(|e| ModelError::Corrupt(e.to_string()))?;
        model.check_consistency()?;
        Ok(model)
    }

    fn check_consistency(&self) -> Result<(), ModelError> {
        let width = self.profile.width();
        let trees: Vec<&Tree> = match &self.payload {
            Payload::Tree(t) => vec![t],
            Payload::Forest(f) => f.trees.iter().collect(),
            Payload::Boosted(b) => b.trees.iter().collect(),
        };
        let bad = |msg: &str| Err(ModelError::Corrupt(msg.to_string()));
        if matches!(&self.payload, Payload::Forest(f) if f.trees.is_empty()) {
            return bad("forest without trees");
        }
        if self.profile.channel_frequency && self.channels.is_none() {
            return bad("channel profile without channel counts");
        }
        for t in trees {
            if t.n_features != width || t.nodes.is_empty() {
                return bad("tree width does not match profile");
            }
            for node in &t.nodes {
                if let crate::trees::Node::Split { rule, left, right } = node {
                    if rule.feature >= width || *left >= t.nodes.len() || *right >= t.nodes.len() {
                        return bad("tree node out of range");
                    }
                }
            }
        }
        Ok(())
    }

    pub fn save_file(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        self.save(BufWriter::new(File::create(path)?))
    }

    pub fn load_file(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        Self::load(BufReader::new(File::open(path)?))
    }
}
