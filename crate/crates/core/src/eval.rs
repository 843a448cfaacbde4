//! Hold-out evaluation: seeded train/test split, regression metrics and
//! the train-vs-test score table.

use std::fmt::{self, Write as _};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureMatrix;
use crate::model::{self, ModelError, ModelKind, ModelSpec, RegressionModel, TargetTransform};

pub const DEFAULT_SPLIT_RATIO: f64 = 0.7;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("need at least 2 rows to split, got {0}")]
    InsufficientData(usize),
    #[error("split ratio must be in (0, 1), got {0}")]
    Ratio(f64),
    #[error("split of {n} rows at ratio {ratio} leaves an empty partition")]
    EmptyPartition { n: usize, ratio: f64 },
    #[error("prediction/actual length mismatch: {0} vs {1}")]
    Shape(usize, usize),
    #[error("metric needs at least one value")]
    Empty,
    #[error("actual values have zero variance; R² is undefined")]
    Degenerate,
    #[error("every actual value is zero; MAPE is undefined")]
    AllZeroActuals,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
    pub ratio: f64,
}

/// Shuffles `0..n` with ChaCha8 seeded from `seed`; the first
/// `round(ratio * n)` indices train, the rest test.
pub fn train_test_split(n: usize, ratio: f64, seed: u64) -> Result<SplitIndices, EvalError> {
    if n < 2 {
        return Err(EvalError::InsufficientData(n));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(EvalError::Ratio(ratio));
    }
    let n_train = (ratio * n as f64).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(EvalError::EmptyPartition { n, ratio });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = order.split_off(n_train);
    Ok(SplitIndices {
        train: order,
        test,
        seed,
        ratio,
    })
}

fn check_pair(pred: &[f64], actual: &[f64]) -> Result<(), EvalError> {
    if pred.len() != actual.len() {
        return Err(EvalError::Shape(pred.len(), actual.len()));
    }
    if pred.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(())
}

pub fn rmse(pred: &[f64], actual: &[f64]) -> Result<f64, EvalError> {
    check_pair(pred, actual)?;
    let sq: f64 = pred.iter().zip(actual).map(|(p, a)| (p - a) * (p - a)).sum();
    Ok((sq / pred.len() as f64).sqrt())
}

/// Coefficient of determination, `1 - SS_res / SS_tot`. Negative when the
/// predictions do worse than the mean.
pub fn r2(pred: &[f64], actual: &[f64]) -> Result<f64, EvalError> {
    check_pair(pred, actual)?;
    let mean = actual.iter().sum::<f64>() / actual.len() as f64;
    let ss_tot: f64 = actual.iter().map(|a| (a - mean) * (a - mean)).sum();
    if ss_tot == 0.0 {
        return Err(EvalError::Degenerate);
    }
    let ss_res: f64 = pred.iter().zip(actual).map(|(p, a)| (p - a) * (p - a)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mape {
    pub value: f64,
    /// Rows skipped because their actual value is zero.
    pub excluded: usize,
}

/// Mean absolute percentage error as a fraction (0.1 = 10 %).
pub fn mape(pred: &[f64], actual: &[f64]) -> Result<Mape, EvalError> {
    check_pair(pred, actual)?;
    let mut sum = 0.0;
    let mut used = 0usize;
    for (p, a) in pred.iter().zip(actual) {
        if *a != 0.0 {
            sum += ((p - a) / a).abs();
            used += 1;
        }
    }
    if used == 0 {
        return Err(EvalError::AllZeroActuals);
    }
    Ok(Mape {
        value: sum / used as f64,
        excluded: actual.len() - used,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n: usize,
    pub r2: f64,
    pub rmse: f64,
    pub mape: Option<f64>,
    pub mape_excluded: usize,
}

impl Metrics {
    pub fn compute(pred: &[f64], actual: &[f64]) -> Result<Self, EvalError> {
        let m = match mape(pred, actual) {
            Ok(m) => Some(m),
            Err(EvalError::AllZeroActuals) => None,
            Err(e) => return Err(e),
        };
        Ok(Metrics {
            n: pred.len(),
            r2: r2(pred, actual)?,
            rmse: rmse(pred, actual)?,
            mape: m.map(|m| m.value),
            mape_excluded: m.map_or(actual.len(), |m| m.excluded),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionScores {
    pub train: Metrics,
    pub test: Metrics,
}

/// Train and test metrics of one model. `raw` is measured in view counts,
/// `transformed` in the model's training space (log1p views by default).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub model_kind: ModelKind,
    pub model_version: String,
    pub profile: String,
    pub transform: TargetTransform,
    pub split_seed: u64,
    pub split_ratio: f64,
    pub raw: PartitionScores,
    pub transformed: PartitionScores,
}

impl ScoreReport {
    /// Training score as shown in the table: R² × 100 in view space.
    pub fn train_score(&self) -> f64 {
        self.raw.train.r2 * 100.0
    }

    pub fn test_score(&self) -> f64 {
        self.raw.test.r2 * 100.0
    }
}

/// Scores `model` on both partitions of `data`.
pub fn score_model(
    model: &RegressionModel,
    data: &FeatureMatrix,
    split: &SplitIndices,
) -> Result<ScoreReport, EvalError> {
    let part = |rows: &[usize]| -> Result<(Metrics, Metrics), EvalError> {
        let subset = data.select_rows(rows);
        let pred_raw = model.predict_matrix(&subset)?;
        let raw = Metrics::compute(&pred_raw, &subset.targets)?;
        let pred_t: Vec<f64> = subset
            .x
            .rows()
            .map(|r| model.predict_transformed(r))
            .collect::<Result<_, _>>()?;
        let actual_t: Vec<f64> = subset.targets.iter().map(|&v| model.transform.forward(v)).collect();
        let transformed = Metrics::compute(&pred_t, &actual_t)?;
        Ok((raw, transformed))
    };
    let (train_raw, train_t) = part(&split.train)?;
    let (test_raw, test_t) = part(&split.test)?;
    Ok(ScoreReport {
        model_kind: model.kind,
        model_version: model.version(),
        profile: model.profile.id(),
        transform: model.transform,
        split_seed: split.seed,
        split_ratio: split.ratio,
        raw: PartitionScores {
            train: train_raw,
            test: test_raw,
        },
        transformed: PartitionScores {
            train: train_t,
            test: test_t,
        },
    })
}

/// Splits `data`, trains `spec` on the training partition and scores both
/// partitions. `seed` drives the split and, for forests, the trees.
pub fn evaluate(
    spec: &ModelSpec,
    data: &FeatureMatrix,
    ratio: f64,
    seed: u64,
    transform: TargetTransform,
) -> Result<(RegressionModel, ScoreReport), EvalError> {
    let split = train_test_split(data.n_rows(), ratio, seed)?;
    let mut spec = spec.clone();
    if let ModelSpec::Forest(p) = &mut spec {
        p.seed = seed;
    }
    let train = data.select_rows(&split.train);
    let model = model::train(&spec, &train, transform, None)?;
    let report = score_model(&model, data, &split)?;
    Ok((model, report))
}

/// Renders reports as an aligned text table, one model per row.
pub fn render_table(reports: &[ScoreReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<18} {:>18} {:>17} {:>10} {:>10} {:>14} {:>14}",
        "Model", "Training score (%)", "Testing score (%)", "Train R²", "Test R²", "Train RMSE", "Test RMSE"
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{:<18} {:>18.1} {:>17.1} {:>10.4} {:>10.4} {:>14.1} {:>14.1}",
            r.model_kind.label(),
            r.train_score(),
            r.test_score(),
            r.raw.train.r2,
            r.raw.test.r2,
            r.raw.train.rmse,
            r.raw.test.rmse,
        );
    }
    out
}

impl fmt::Display for ScoreReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_table(std::slice::from_ref(self)))
    }
}
