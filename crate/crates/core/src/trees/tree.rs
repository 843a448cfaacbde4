use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::split::{SplitRule, SplitSearch};
use super::{check_training_data, Matrix, TreeError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Minimum SSE reduction a split must achieve.
    pub min_gain: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 8,
            min_samples_leaf: 5,
            min_gain: 0.0,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<(), TreeError> {
        if self.max_depth < 1 {
            return Err(TreeError::Param("max_depth must be >= 1".into()));
        }
        if self.min_samples_leaf < 1 {
            return Err(TreeError::Param("min_samples_leaf must be >= 1".into()));
        }
        if self.min_gain.is_nan() || self.min_gain < 0.0 {
            return Err(TreeError::Param("min_gain must be >= 0".into()));
        }
        Ok(())
    }
}

/// How a leaf turns its targets into an output value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeafRule {
    Mean,
    /// `sum / (n + lambda)`, the L2-shrunk leaf used by boosting.
    Shrunk {
        lambda: f64,
    },
}

/// Chooses which features a split may consider.
pub trait FeatureSampler {
    /// Candidate feature indices out of `n_features`, ascending.
    fn candidates(&mut self, n_features: usize) -> Vec<usize>;
}

pub struct AllFeatures;

impl FeatureSampler for AllFeatures {
    fn candidates(&mut self, n_features: usize) -> Vec<usize> {
        (0..n_features).collect()
    }
}

/// Draws `ceil(fraction * p)` distinct features per split.
pub struct RandomSubset<'a> {
    pub rng: &'a mut ChaCha8Rng,
    pub fraction: f64,
}

impl RandomSubset<'_> {
    pub fn subset_size(fraction: f64, n_features: usize) -> usize {
        // Guard against 1/3 * 12 landing a hair above 4.
        let k = (fraction * n_features as f64 - 1e-9).ceil() as usize;
        k.clamp(1, n_features.max(1))
    }
}

impl FeatureSampler for RandomSubset<'_> {
    fn candidates(&mut self, n_features: usize) -> Vec<usize> {
        let k = Self::subset_size(self.fraction, n_features);
        if k >= n_features {
            return (0..n_features).collect();
        }
        let mut picked = index::sample(self.rng, n_features, k).into_vec();
        picked.sort_unstable();
        picked
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
        /// Training rows that reached this leaf.
        n: usize,
    },
    Split {
        rule: SplitRule,
        left: usize,
        right: usize,
    },
}

/// A fitted regression tree. Nodes are stored flat; index 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub n_features: usize,
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(value: f64, n: usize, n_features: usize) -> Self {
        Tree {
            n_features,
            nodes: vec![Node::Leaf { value, n }],
        }
    }

    /// Predicts one row. The caller guarantees the row width.
    #[inline]
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value, .. } => return *value,
                Node::Split { rule, left, right } => {
                    at = if rule.goes_left(row) { *left } else { *right };
                }
            }
        }
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

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Grows a tree greedily on all rows of `x`.
pub fn fit_tree(
    x: &Matrix,
    y: &[f64],
    params: &TreeParams,
    sampler: Option<&mut dyn FeatureSampler>,
) -> Result<Tree, TreeError> {
    check_training_data(x, y)?;
    params.validate()?;
    let rows: Vec<usize> = (0..x.n_rows()).collect();
    let mut all = AllFeatures;
    let sampler = sampler.unwrap_or(&mut all);
    Ok(fit_tree_on_rows(x, y, rows, params, LeafRule::Mean, sampler))
}

struct Task {
    slot: usize,
    depth: usize,
    /// The node's rows, one list per feature, each sorted by that
    /// feature's value.
    sorted: Vec<Vec<usize>>,
}

/// Grows a tree on `rows` (which may repeat, as in a bootstrap sample).
/// Inputs are assumed validated.
pub(crate) fn fit_tree_on_rows(
    x: &Matrix,
    y: &[f64],
    rows: Vec<usize>,
    params: &TreeParams,
    leaf: LeafRule,
    sampler: &mut dyn FeatureSampler,
) -> Tree {
    let p = x.n_cols();
    let sorted: Vec<Vec<usize>> = (0..p)
        .map(|f| {
            let mut order = rows.clone();
            order.sort_unstable_by(|&a, &b| x.get(a, f).total_cmp(&x.get(b, f)).then(a.cmp(&b)));
            order
        })
        .collect();

    let mut nodes = vec![Node::Leaf { value: 0.0, n: 0 }];
    let mut stack = vec![Task {
        slot: 0,
        depth: 0,
        sorted,
    }];

    while let Some(Task { slot, depth, sorted }) = stack.pop() {
        let node_rows = &sorted[0];
        let split = if depth < params.max_depth && node_rows.len() >= 2 * params.min_samples_leaf {
            let mut search = SplitSearch::new(node_rows.iter().map(|&r| y[r]), params.min_samples_leaf);
            for f in sampler.candidates(p) {
                search.scan(f, &sorted[f], |r| x.get(r, f), |r| y[r]);
            }
            search.finish(params.min_gain)
        } else {
            None
        };

        let Some((rule, _, _)) = split else {
            nodes[slot] = make_leaf(node_rows, y, leaf);
            continue;
        };

        let mut left_lists = Vec::with_capacity(p);
        let mut right_lists = Vec::with_capacity(p);
        for list in sorted {
            let (l, r): (Vec<usize>, Vec<usize>) = list
                .into_iter()
                .partition(|&row| x.get(row, rule.feature) <= rule.threshold);
            left_lists.push(l);
            right_lists.push(r);
        }
        let left = nodes.len();
        let right = left + 1;
        nodes.push(Node::Leaf { value: 0.0, n: 0 });
        nodes.push(Node::Leaf { value: 0.0, n: 0 });
        nodes[slot] = Node::Split { rule, left, right };
        stack.push(Task {
            slot: right,
            depth: depth + 1,
            sorted: right_lists,
        });
        stack.push(Task {
            slot: left,
            depth: depth + 1,
            sorted: left_lists,
        });
    }

    Tree { n_features: p, nodes }
}

fn make_leaf(rows: &[usize], y: &[f64], rule: LeafRule) -> Node {
    let n = rows.len();
    let sum: f64 = rows.iter().map(|&r| y[r]).sum();
    let value = match rule {
        LeafRule::Mean => {
            // Keep the mean inside the observed range despite rounding.
            let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
                (lo.min(y[r]), hi.max(y[r]))
            });
            (sum / n as f64).clamp(lo, hi)
        }
        LeafRule::Shrunk { lambda } => sum / (n as f64 + lambda),
    };
    Node::Leaf { value, n }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::best_split;
    use rand::{Rng, SeedableRng};

    fn random_data(rng: &mut ChaCha8Rng, n: usize, p: usize) -> (Matrix, Vec<f64>) {
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.random::<f64>()).collect()).collect();
        let y = rows
            .iter()
            .map(|r| 3.0 * r[0] + (r[1] > 0.5) as u8 as f64 * 2.0 + rng.random::<f64>())
            .collect();
        (Matrix::from_rows(&rows), y)
    }

    #[test]
    fn constant_target_is_single_leaf() {
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]);
        let t = fit_tree(
            &x,
            &[4.2; 3],
            &TreeParams {
                min_samples_leaf: 1,
                ..Default::default()
            },
            None,
        )
        .unwrap();
        assert_eq!(t.nodes, vec![Node::Leaf { value: 4.2, n: 3 }]);
        assert_eq!(t.predict(&[100.0]).unwrap(), 4.2);
    }

    #[test]
    fn stump_finds_step() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 / 19.0]).collect();
        let y: Vec<f64> = rows.iter().map(|r| if r[0] > 0.5 { 10.0 } else { 0.0 }).collect();
        let x = Matrix::from_rows(&rows);
        let p = TreeParams {
            max_depth: 1,
            min_samples_leaf: 1,
            min_gain: 0.0,
        };
        let t = fit_tree(&x, &y, &p, None).unwrap();
        let oracle = best_split(&x, &y, &[0], &p).unwrap().unwrap();
        match &t.nodes[0] {
            Node::Split { rule, .. } => {
                assert_eq!(*rule, oracle.rule);
                assert!((rule.threshold - 0.5).abs() < 1.0 / 19.0);
            }
            other => panic!("expected a split, got {other:?}"),
        }
        assert_eq!(t.n_nodes(), 3);
    }

    #[test]
    fn depth_one_has_at_most_three_nodes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (x, y) = random_data(&mut rng, 100, 3);
        let t = fit_tree(
            &x,
            &y,
            &TreeParams {
                max_depth: 1,
                min_samples_leaf: 1,
                min_gain: 0.0,
            },
            None,
        )
        .unwrap();
        assert!(t.n_nodes() <= 3);
    }

    #[test]
    fn unbounded_tree_interpolates_unique_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (x, y) = random_data(&mut rng, 80, 3);
        let p = TreeParams {
            max_depth: usize::MAX,
            min_samples_leaf: 1,
            min_gain: 0.0,
        };
        let t = fit_tree(&x, &y, &p, None).unwrap();
        for (row, target) in x.rows().zip(&y) {
            assert_eq!(t.predict(row).unwrap(), *target);
        }
    }

    #[test]
    fn leaves_respect_min_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (x, y) = random_data(&mut rng, 200, 4);
        let t = fit_tree(
            &x,
            &y,
            &TreeParams {
                max_depth: 20,
                min_samples_leaf: 7,
                min_gain: 0.0,
            },
            None,
        )
        .unwrap();
        let mut total = 0;
        for node in &t.nodes {
            if let Node::Leaf { n, .. } = node {
                assert!(*n >= 7);
                total += n;
            }
        }
        assert_eq!(total, 200);
    }

    #[test]
    fn predictions_stay_in_target_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (x, y) = random_data(&mut rng, 150, 3);
        let t = fit_tree(&x, &y, &TreeParams::default(), None).unwrap();
        let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for _ in 0..500 {
            let row: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..3.0)).collect();
            let v = t.predict(&row).unwrap();
            assert!(lo <= v && v <= hi);
        }
    }

    #[test]
    fn width_mismatch_and_empty_data() {
        let x = Matrix::from_rows(&[vec![1.0, 2.0]]);
        let t = fit_tree(&x, &[1.0], &TreeParams::default(), None).unwrap();
        assert_eq!(t.predict(&[1.0]), Err(TreeError::Shape { expected: 2, found: 1 }));
        let empty = Matrix::new(0, 2, vec![]);
        assert_eq!(
            fit_tree(&empty, &[], &TreeParams::default(), None),
            Err(TreeError::EmptyDataset)
        );
    }

    #[test]
    fn invalid_params() {
        let x = Matrix::from_rows(&[vec![1.0]]);
        for p in [
            TreeParams {
                max_depth: 0,
                ..Default::default()
            },
            TreeParams {
                min_samples_leaf: 0,
                ..Default::default()
            },
            TreeParams {
                min_gain: -1.0,
                ..Default::default()
            },
        ] {
            assert!(matches!(fit_tree(&x, &[1.0], &p, None), Err(TreeError::Param(_))));
        }
    }

    #[test]
    fn duplicated_rows_leave_tree_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (x, y) = random_data(&mut rng, 40, 3);
        let p = TreeParams {
            max_depth: 6,
            min_samples_leaf: 1,
            min_gain: 0.0,
        };
        let single = fit_tree(&x, &y, &p, None).unwrap();
        let idx: Vec<usize> = (0..40).chain(0..40).collect();
        let x2 = x.select_rows(&idx);
        let y2: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
        let double = fit_tree(&x2, &y2, &p, None).unwrap();
        assert_eq!(single.n_nodes(), double.n_nodes());
        for (a, b) in single.nodes.iter().zip(&double.nodes) {
            match (a, b) {
                (Node::Split { rule: r1, .. }, Node::Split { rule: r2, .. }) => assert_eq!(r1, r2),
                (Node::Leaf { value: v1, n: n1 }, Node::Leaf { value: v2, n: n2 }) => {
                    assert!((v1 - v2).abs() <= 1e-12 * v1.abs().max(1.0));
                    assert_eq!(2 * n1, *n2);
                }
                _ => panic!("structure differs"),
            }
        }
    }

    #[test]
    fn subset_sizes() {
        assert_eq!(RandomSubset::subset_size(1.0 / 3.0, 12), 4);
        assert_eq!(RandomSubset::subset_size(1.0 / 3.0, 15), 5);
        assert_eq!(RandomSubset::subset_size(0.01, 5), 1);
        assert_eq!(RandomSubset::subset_size(1.0, 7), 7);
    }
}
