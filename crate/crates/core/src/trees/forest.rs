use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{fit_tree_on_rows, AllFeatures, FeatureSampler, LeafRule, RandomSubset};
use super::{check_training_data, Matrix, Tree, TreeError, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Share of features offered to each split, in (0, 1].
    pub feature_fraction: f64,
    pub bootstrap: bool,
    pub seed: u64,
    pub tree: TreeParams,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            feature_fraction: 1.0 / 3.0,
            bootstrap: true,
            seed: 0,
            tree: TreeParams::default(),
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<(), TreeError> {
        if self.n_trees < 1 {
            return Err(TreeError::Param("n_trees must be >= 1".into()));
        }
        if !(self.feature_fraction > 0.0 && self.feature_fraction <= 1.0) {
            return Err(TreeError::Param("feature_fraction must be in (0, 1]".into()));
        }
        self.tree.validate()
    }
}

/// Generator for member tree `index`: ChaCha8 keyed by the forest seed,
/// one stream per tree.
pub fn tree_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    pub fn n_features(&self) -> usize {
        self.trees[0].n_features
    }

    /// Mean of the member predictions, summed in member order.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_row(row)).sum();
        sum / self.trees.len() as f64
    }

    pub fn predict(&self, row: &[f64]) -> Result<f64, TreeError> {
        if row.len() != self.n_features() {
            return Err(TreeError::Shape {
                expected: self.n_features(),
                found: row.len(),
            });
        }
        Ok(self.predict_row(row))
    }

    pub fn member_predictions(&self, row: &[f64]) -> Vec<f64> {
        self.trees.iter().map(|t| t.predict_row(row)).collect()
    }
}

/// Trains `n_trees` trees, each on its own bootstrap sample and with
/// per-split feature subsampling. Members train in parallel; the result
/// does not depend on scheduling.
pub fn fit_forest(x: &Matrix, y: &[f64], params: &ForestParams) -> Result<Forest, TreeError> {
    check_training_data(x, y)?;
    params.validate()?;
    let n = x.n_rows();
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = tree_rng(params.seed, i);
            let rows: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            if params.feature_fraction >= 1.0 {
                fit_tree_on_rows(x, y, rows, &params.tree, LeafRule::Mean, &mut AllFeatures)
            } else {
                let mut sampler = RandomSubset {
                    rng: &mut rng,
                    fraction: params.feature_fraction,
                };
                let sampler: &mut dyn FeatureSampler = &mut sampler;
                fit_tree_on_rows(x, y, rows, &params.tree, LeafRule::Mean, sampler)
            }
        })
        .collect();
    Ok(Forest { trees })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::fit_tree;

    fn data() -> (Matrix, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rows: Vec<Vec<f64>> = (0..60).map(|_| (0..4).map(|_| rng.random::<f64>()).collect()).collect();
        let y = rows.iter().map(|r| r[0] * 5.0 + r[2] * r[3]).collect();
        (Matrix::from_rows(&rows), y)
    }

    #[test]
    fn single_unsampled_member_equals_tree() {
        let (x, y) = data();
        let tree_params = TreeParams {
            max_depth: 5,
            min_samples_leaf: 2,
            min_gain: 0.0,
        };
        let f = fit_forest(
            &x,
            &y,
            &ForestParams {
                n_trees: 1,
                feature_fraction: 1.0,
                bootstrap: false,
                seed: 77,
                tree: tree_params,
            },
        )
        .unwrap();
        let t = fit_tree(&x, &y, &tree_params, None).unwrap();
        assert_eq!(f.trees[0], t);
    }

    #[test]
    fn same_seed_same_forest() {
        let (x, y) = data();
        let p = ForestParams {
            n_trees: 8,
            seed: 3,
            ..Default::default()
        };
        assert_eq!(fit_forest(&x, &y, &p).unwrap(), fit_forest(&x, &y, &p).unwrap());
        let other = ForestParams { seed: 4, ..p };
        assert_ne!(fit_forest(&x, &y, &p).unwrap(), fit_forest(&x, &y, &other).unwrap());
    }

    #[test]
    fn prediction_is_member_mean() {
        let (x, y) = data();
        let f = fit_forest(
            &x,
            &y,
            &ForestParams {
                n_trees: 7,
                ..Default::default()
            },
        )
        .unwrap();
        for row in x.rows() {
            let members = f.member_predictions(row);
            let mean = members.iter().sum::<f64>() / members.len() as f64;
            assert_eq!(f.predict(row).unwrap(), mean);
        }
    }

    #[test]
    fn rejects_bad_params() {
        let (x, y) = data();
        for p in [
            ForestParams {
                n_trees: 0,
                ..Default::default()
            },
            ForestParams {
                feature_fraction: 0.0,
                ..Default::default()
            },
            ForestParams {
                feature_fraction: 1.5,
                ..Default::default()
            },
        ] {
            assert!(matches!(fit_forest(&x, &y, &p), Err(TreeError::Param(_))));
        }
    }
}
