//! Correlation screening and box-plot outlier handling.
//!
//! Quartiles use linear interpolation between order statistics (the
//! "type 7" rule): for sorted `x` of length `n`, `Q(p) = x[h] + (h - ⌊h⌋)
//! (x[⌊h⌋+1] - x[⌊h⌋])` with `h = (n - 1) p`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureMatrix;
use crate::ingest::VideoRecord;

pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const DEFAULT_TUKEY_K: f64 = 1.5;

/// Pseudo column naming the target in correlation inputs.
pub const TARGET_COLUMN: &str = "views";

#[derive(Debug, Error, PartialEq)]
pub enum EdaError {
    #[error("series lengths differ: {0} vs {1}")]
    Shape(usize, usize),
    #[error("need at least {needed} values, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("series {0:?} has zero variance")]
    Degenerate(String),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("non-finite value in series {0:?}")]
    NonFinite(String),
}

/// Pearson product-moment correlation, clamped to [-1, 1].
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, EdaError> {
    pearson_named(x, "x", y, "y")
}

fn pearson_named(x: &[f64], xn: &str, y: &[f64], yn: &str) -> Result<f64, EdaError> {
    if x.len() != y.len() {
        return Err(EdaError::Shape(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(EdaError::InsufficientData {
            needed: 2,
            got: x.len(),
        });
    }
    check_series(x, xn)?;
    check_series(y, yn)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

fn check_series(x: &[f64], name: &str) -> Result<(), EdaError> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(EdaError::NonFinite(name.to_string()));
    }
    if x.iter().all(|&v| v == x[0]) {
        return Err(EdaError::Degenerate(name.to_string()));
    }
    Ok(())
}

/// Symmetric matrix of pairwise Pearson coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    /// Correlates named series. Any zero-variance series is an error.
    pub fn from_series(series: &[(String, Vec<f64>)]) -> Result<Self, EdaError> {
        let n = series.len();
        let mut values = vec![vec![0.0; n]; n];
        for i in 0..n {
            values[i][i] = 1.0;
            for j in i + 1..n {
                let r = pearson_named(&series[i].1, &series[i].0, &series[j].1, &series[j].0)?;
                values[i][j] = r;
                values[j][i] = r;
            }
        }
        if n == 1 {
            pearson_named(&series[0].1, &series[0].0, &series[0].1, &series[0].0)?;
        }
        Ok(CorrelationMatrix {
            labels: series.iter().map(|(l, _)| l.clone()).collect(),
            values,
        })
    }

    /// Drops zero-variance series instead of failing; their names come
    /// back alongside the matrix.
    pub fn from_series_lenient(series: &[(String, Vec<f64>)]) -> Result<(Self, Vec<String>), EdaError> {
        let mut kept = Vec::new();
        let mut degenerate = Vec::new();
        for (name, values) in series {
            match check_series(values, name) {
                Ok(()) => kept.push((name.clone(), values.clone())),
                Err(EdaError::Degenerate(_)) => degenerate.push(name.clone()),
                Err(e) => return Err(e),
            }
        }
        Ok((Self::from_series(&kept)?, degenerate))
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.values[i][j])
    }

    /// CSV with a leading label column, like a heatmap's axes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (l, row) in self.labels.iter().zip(&self.values) {
            out.push_str(l);
            for v in row {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Named columns of a feature matrix, with [`TARGET_COLUMN`] for views.
pub fn matrix_series(m: &FeatureMatrix, cols: &[&str]) -> Result<Vec<(String, Vec<f64>)>, EdaError> {
    cols.iter()
        .map(|&c| {
            let values = if c == TARGET_COLUMN {
                m.targets.clone()
            } else {
                m.column(c).ok_or_else(|| EdaError::UnknownColumn(c.to_string()))?
            };
            Ok((c.to_string(), values))
        })
        .collect()
}

pub fn correlation_matrix(m: &FeatureMatrix, cols: &[&str]) -> Result<CorrelationMatrix, EdaError> {
    if m.n_rows() < 2 {
        return Err(EdaError::InsufficientData {
            needed: 2,
            got: m.n_rows(),
        });
    }
    CorrelationMatrix::from_series(&matrix_series(m, cols)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatedPair {
    pub a: String,
    pub b: String,
    pub r: f64,
}

/// Unordered pairs with `|r| >= t`, strongest first.
pub fn threshold_pairs(cm: &CorrelationMatrix, t: f64) -> Result<Vec<CorrelatedPair>, EdaError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(EdaError::Param(format!("threshold must be in [0, 1], got {t}")));
    }
    let n = cm.labels.len();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let r = cm.values[i][j];
            if r.abs() >= t {
                pairs.push(CorrelatedPair {
                    a: cm.labels[i].clone(),
                    b: cm.labels[j].clone(),
                    r,
                });
            }
        }
    }
    pairs.sort_by(|p, q| q.r.abs().total_cmp(&p.r.abs()));
    Ok(pairs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierReport {
    pub column: String,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    pub lower_fence: f64,
    pub upper_fence: f64,
    /// Positions of values strictly outside the fences.
    pub outlier_row_indices: Vec<usize>,
}

/// Type-7 quantile of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Tukey fences `[q1 - k·iqr, q3 + k·iqr]` and the values outside them.
pub fn iqr_outliers(x: &[f64], k: f64) -> Result<OutlierReport, EdaError> {
    if x.len() < 4 {
        return Err(EdaError::InsufficientData {
            needed: 4,
            got: x.len(),
        });
    }
    if !(k >= 0.0 && k.is_finite()) {
        return Err(EdaError::Param(format!("k must be finite and >= 0, got {k}")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(EdaError::NonFinite(String::new()));
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let lower_fence = q1 - k * iqr;
    let upper_fence = q3 + k * iqr;
    let outlier_row_indices = x
        .iter()
        .enumerate()
        .filter(|(_, &v)| v < lower_fence || v > upper_fence)
        .map(|(i, _)| i)
        .collect();
    Ok(OutlierReport {
        column: String::new(),
        q1,
        q3,
        iqr,
        lower_fence,
        upper_fence,
        outlier_row_indices,
    })
}

/// Record columns eligible for outlier filtering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NumericColumn {
    ViewCount,
    Likes,
    Dislikes,
    CommentCount,
}

impl NumericColumn {
    /// Target and engagement columns, the default filter set.
    pub const ALL: [NumericColumn; 4] = [
        NumericColumn::ViewCount,
        NumericColumn::Likes,
        NumericColumn::Dislikes,
        NumericColumn::CommentCount,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NumericColumn::ViewCount => "view_count",
            NumericColumn::Likes => "likes",
            NumericColumn::Dislikes => "dislikes",
            NumericColumn::CommentCount => "comment_count",
        }
    }

    pub fn value(self, r: &VideoRecord) -> f64 {
        (match self {
            NumericColumn::ViewCount => r.view_count,
            NumericColumn::Likes => r.likes,
            NumericColumn::Dislikes => r.dislikes,
            NumericColumn::CommentCount => r.comment_count,
        }) as f64
    }
}

impl fmt::Display for NumericColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NumericColumn {
    type Err = EdaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NumericColumn::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| EdaError::UnknownColumn(s.to_string()))
    }
}

/// One pass of IQR filtering: drops every record flagged in any of
/// `columns`. Fences come from the input only; the output is not
/// re-screened.
pub fn remove_outliers(
    records: &[VideoRecord],
    columns: &[NumericColumn],
    k: f64,
) -> Result<(Vec<VideoRecord>, Vec<OutlierReport>), EdaError> {
    let mut drop = vec![false; records.len()];
    let mut reports = Vec::with_capacity(columns.len());
    for &col in columns {
        let values: Vec<f64> = records.iter().map(|r| col.value(r)).collect();
        let mut report = iqr_outliers(&values, k)?;
        report.column = col.name().to_string();
        for &i in &report.outlier_row_indices {
            drop[i] = true;
        }
        reports.push(report);
    }
    let kept = records
        .iter()
        .zip(&drop)
        .filter(|(_, &d)| !d)
        .map(|(r, _)| r.clone())
        .collect();
    Ok((kept, reports))
}
