//! Regression trees and the two ensembles built from them.
//!
//! Everything here works on plain `f64` matrices and targets; target
//! transforms and feature profiles live in [`crate::model`].

mod boost;
mod forest;
mod split;
mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use boost::{fit_boosted, fit_boosted_traced, BoostParams, BoostedTrees};
pub use forest::{fit_forest, tree_rng, Forest, ForestParams};
pub use split::{best_split, SplitCandidate, SplitRule};
pub use tree::{fit_tree, AllFeatures, FeatureSampler, LeafRule, Node, RandomSubset, Tree, TreeParams};

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("cannot train on an empty dataset")]
    EmptyDataset,
    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("feature values must be finite (row {row}, column {col})")]
    NonFinite { row: usize, col: usize },
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n_rows * n_cols, "matrix data length");
        Matrix { n_rows, n_cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for r in rows {
            assert_eq!(r.len(), n_cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix::new(rows.len(), n_cols, data)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n_cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, col)).collect()
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.n_cols);
        for &i in rows {
            data.extend_from_slice(self.row(i));
        }
        Matrix::new(rows.len(), self.n_cols, data)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Applies `f` to every value of column `col`.
    pub fn map_column(&mut self, col: usize, f: impl Fn(f64) -> f64) {
        for i in 0..self.n_rows {
            let v = &mut self.data[i * self.n_cols + col];
            *v = f(*v);
        }
    }
}

pub(crate) fn check_training_data(x: &Matrix, y: &[f64]) -> Result<(), TreeError> {
    if x.n_rows() == 0 || y.is_empty() {
        return Err(TreeError::EmptyDataset);
    }
    if x.n_rows() != y.len() {
        return Err(TreeError::Shape {
            expected: x.n_rows(),
            found: y.len(),
        });
    }
    if x.n_cols() == 0 {
        return Err(TreeError::Param("matrix has no feature columns".into()));
    }
    for i in 0..x.n_rows() {
        for j in 0..x.n_cols() {
            if !x.get(i, j).is_finite() {
                return Err(TreeError::NonFinite { row: i, col: j });
            }
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(TreeError::Param("targets must be finite".into()));
    }
    Ok(())
}
