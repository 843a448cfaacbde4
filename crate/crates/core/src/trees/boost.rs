use serde::{Deserialize, Serialize};

use super::tree::{fit_tree_on_rows, AllFeatures, LeafRule};
use super::{check_training_data, Matrix, Tree, TreeError, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub n_rounds: usize,
    /// Learning rate, in (0, 1].
    pub eta: f64,
    /// L2 penalty on leaf values.
    pub lambda: f64,
    pub tree: TreeParams,
    /// Initial prediction; the target mean when unset.
    pub base_score: Option<f64>,
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams {
            n_rounds: 200,
            eta: 0.1,
            lambda: 1.0,
            tree: TreeParams {
                max_depth: 4,
                ..TreeParams::default()
            },
            base_score: None,
        }
    }
}

impl BoostParams {
    pub fn validate(&self) -> Result<(), TreeError> {
        if self.n_rounds < 1 {
            return Err(TreeError::Param("n_rounds must be >= 1".into()));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(TreeError::Param("eta must be in (0, 1]".into()));
        }
        if self.lambda.is_nan() || self.lambda < 0.0 {
            return Err(TreeError::Param("lambda must be >= 0".into()));
        }
        if self.base_score.is_some_and(|b| !b.is_finite()) {
            return Err(TreeError::Param("base_score must be finite".into()));
        }
        self.tree.validate()
    }
}

/// Additive ensemble: `base_score + eta * sum(tree(row))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedTrees {
    pub base_score: f64,
    pub eta: f64,
    pub n_features: usize,
    pub trees: Vec<Tree>,
}

impl BoostedTrees {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.trees
            .iter()
            .fold(self.base_score, |acc, t| acc + self.eta * t.predict_row(row))
    }

    pub fn predict(&self, row: &[f64]) -> Result<f64, TreeError> {
        if row.len() != self.n_features {
            return Err(TreeError::Shape {
                expected: self.n_features,
                found: row.len(),
            });
        }
        Ok(self.predict_row(row))
    }
}

pub fn fit_boosted(x: &Matrix, y: &[f64], params: &BoostParams) -> Result<BoostedTrees, TreeError> {
    fit_boosted_traced(x, y, params).map(|(m, _)| m)
}

/// Like [`fit_boosted`], also returning the training RMSE before the first
/// round and after each round (`n_rounds + 1` values).
pub fn fit_boosted_traced(x: &Matrix, y: &[f64], params: &BoostParams) -> Result<(BoostedTrees, Vec<f64>), TreeError> {
    check_training_data(x, y)?;
    params.validate()?;
    let n = y.len();
    let base_score = params.base_score.unwrap_or_else(|| y.iter().sum::<f64>() / n as f64);
    let mut fitted = vec![base_score; n];
    let mut residuals = vec![0.0; n];
    let rmse = |fitted: &[f64]| {
        let sq: f64 = fitted.iter().zip(y).map(|(f, t)| (t - f) * (t - f)).sum();
        (sq / n as f64).sqrt()
    };
    let mut trace = Vec::with_capacity(params.n_rounds + 1);
    trace.push(rmse(&fitted));

    let leaf = LeafRule::Shrunk { lambda: params.lambda };
    let mut trees = Vec::with_capacity(params.n_rounds);
    for _ in 0..params.n_rounds {
        for i in 0..n {
            residuals[i] = y[i] - fitted[i];
        }
        let tree = fit_tree_on_rows(x, &residuals, (0..n).collect(), &params.tree, leaf, &mut AllFeatures);
        for (i, f) in fitted.iter_mut().enumerate() {
            *f += params.eta * tree.predict_row(x.row(i));
        }
        trace.push(rmse(&fitted));
        trees.push(tree);
    }
    Ok((
        BoostedTrees {
            base_score,
            eta: params.eta,
            n_features: x.n_cols(),
            trees,
        },
        trace,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn data(seed: u64, n: usize) -> (Matrix, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.random::<f64>()).collect()).collect();
        let y = rows
            .iter()
            .map(|r| (r[0] * 6.0).sin() + r[1] * r[2] + rng.random::<f64>() * 0.1)
            .collect();
        (Matrix::from_rows(&rows), y)
    }

    #[test]
    fn one_full_round_interpolates() {
        let (x, y) = data(1, 50);
        let p = BoostParams {
            n_rounds: 1,
            eta: 1.0,
            lambda: 0.0,
            tree: TreeParams {
                max_depth: usize::MAX,
                min_samples_leaf: 1,
                min_gain: 0.0,
            },
            base_score: None,
        };
        let m = fit_boosted(&x, &y, &p).unwrap();
        for (row, t) in x.rows().zip(&y) {
            assert!((m.predict(row).unwrap() - t).abs() < 1e-12);
        }
    }

    #[test]
    fn huge_lambda_collapses_to_base_score() {
        let (x, y) = data(2, 50);
        let p = BoostParams {
            lambda: 1e15,
            n_rounds: 5,
            ..Default::default()
        };
        let m = fit_boosted(&x, &y, &p).unwrap();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        for row in x.rows() {
            assert!((m.predict(row).unwrap() - mean).abs() < 1e-9);
        }
    }

    #[test]
    fn explicit_base_score_is_used() {
        let (x, y) = data(3, 20);
        let p = BoostParams {
            base_score: Some(42.0),
            n_rounds: 1,
            lambda: 1e300,
            ..Default::default()
        };
        let m = fit_boosted(&x, &y, &p).unwrap();
        assert_eq!(m.base_score, 42.0);
    }

    #[test]
    fn training_loss_never_increases() {
        let (x, y) = data(4, 120);
        let p = BoostParams {
            lambda: 0.0,
            n_rounds: 40,
            eta: 0.3,
            ..Default::default()
        };
        let (_, trace) = fit_boosted_traced(&x, &y, &p).unwrap();
        assert_eq!(trace.len(), 41);
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} -> {}", w[0], w[1]);
        }
        assert!(trace[40] < trace[0] * 0.5);
    }

    #[test]
    fn rejects_bad_params() {
        let (x, y) = data(5, 10);
        for p in [
            BoostParams {
                n_rounds: 0,
                ..Default::default()
            },
            BoostParams {
                eta: 0.0,
                ..Default::default()
            },
            BoostParams {
                eta: 1.5,
                ..Default::default()
            },
            BoostParams {
                lambda: -1.0,
                ..Default::default()
            },
        ] {
            assert!(matches!(fit_boosted(&x, &y, &p), Err(TreeError::Param(_))));
        }
    }
}
