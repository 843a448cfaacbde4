//! Reference implementations written independently of the library code.
//! They favour obviousness over speed.
#![allow(dead_code, clippy::approx_constant, clippy::type_complexity)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tubepulse_core::trees::Matrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Result of the exhaustive split enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSplit {
    pub feature: usize,
    pub threshold: f64,
    pub child_sse: f64,
}

fn naive_sse(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - mean).powi(2)).sum()
}

/// Tries every feature and every midpoint between consecutive distinct
/// values, partitioning the rows from scratch each time.
///
/// Conventions shared with the library: `value <= threshold` goes left,
/// the midpoint is `0.5*lo + 0.5*hi` (kept inside `[lo, hi)`), and a later
/// candidate only replaces the incumbent if it is better by more than
/// `1e-12 * sum(y^2)`.
pub fn brute_force_split(x: &Matrix, y: &[f64], min_leaf: usize, min_gain: f64) -> Option<OracleSplit> {
    let n = y.len();
    let tol = 1e-12 * y.iter().map(|v| v * v).sum::<f64>();
    let parent = naive_sse(y);
    let mut best: Option<OracleSplit> = None;
    for f in 0..x.n_cols() {
        let mut values: Vec<f64> = (0..n).map(|r| x.get(r, f)).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for pair in values.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let mut t = 0.5 * lo + 0.5 * hi;
            if !(lo <= t && t < hi) {
                t = lo;
            }
            let left: Vec<f64> = (0..n).filter(|&r| x.get(r, f) <= t).map(|r| y[r]).collect();
            let right: Vec<f64> = (0..n).filter(|&r| x.get(r, f) > t).map(|r| y[r]).collect();
            if left.len() < min_leaf || right.len() < min_leaf {
                continue;
            }
            let sse = naive_sse(&left) + naive_sse(&right);
            let better = match best {
                None => true,
                Some(b) => sse < b.child_sse - tol,
            };
            if better {
                best = Some(OracleSplit {
                    feature: f,
                    threshold: t,
                    child_sse: sse,
                });
            }
        }
    }
    best.filter(|b| {
        let gain = parent - b.child_sse;
        gain > tol && gain >= min_gain
    })
}

/// Random regression data. Features mix continuous columns with small
/// integer columns so that repeated values and tied splits occur.
pub fn random_dataset(rng: &mut ChaCha8Rng, max_rows: usize, max_cols: usize) -> (Matrix, Vec<f64>) {
    let n = rng.random_range(2..=max_rows);
    let p = rng.random_range(1..=max_cols);
    let discrete: Vec<bool> = (0..p).map(|_| rng.random_bool(0.5)).collect();
    let mut data = Vec::with_capacity(n * p);
    for _ in 0..n {
        for &d in &discrete {
            data.push(if d {
                rng.random_range(0..5) as f64
            } else {
                rng.random_range(-10.0..10.0)
            });
        }
    }
    let integer_y = rng.random_bool(0.3);
    let y = (0..n)
        .map(|_| {
            if integer_y {
                rng.random_range(0..4) as f64
            } else {
                rng.random_range(-100.0..100.0)
            }
        })
        .collect();
    (Matrix::new(n, p, data), y)
}

/// Pearson's r from raw sums.
pub fn pearson_textbook(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

/// Tukey fences from type-7 quartiles, plus every index outside them.
pub fn brute_force_fences(x: &[f64], k: f64) -> (f64, f64, Vec<usize>) {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let h = (s.len() - 1) as f64 * p;
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(s.len() - 1);
        s[lo] + (h - lo as f64) * (s[hi] - s[lo])
    };
    let (q1, q3) = (q(0.25), q(0.75));
    let iqr = q3 - q1;
    let (lower, upper) = (q1 - k * iqr, q3 + k * iqr);
    let out = (0..x.len()).filter(|&i| x[i] < lower || x[i] > upper).collect();
    (lower, upper, out)
}

// (predicted, actual, rmse, r2, mape, rows skipped by mape), worked out in
// exact rational arithmetic.
#[rustfmt::skip]
pub const METRIC_CASES: [(&[i32], &[i32], f64, f64, f64, usize); 20] = [
    (&[1, 2, 3], &[1, 2, 3], 0.0, 1.0, 0.0, 0),
    (&[2, 4, 6], &[1, 2, 3], 2.160246899469287, -6.0, 1.0, 0),
    (&[0, 0, 0, 0], &[1, 2, 3, 4], 2.7386127875258306, -5.0, 1.0, 0),
    (&[3, -1, 2], &[2, 0, 2], 0.816496580927726, 0.25, 0.25, 1),
    (&[10, 20], &[12, 18], 2.0, 0.5555555555555556, 0.1388888888888889, 0),
    (&[6, 16, 7, 19, 15, 17], &[3, 18, 6, 20, 17, 18], 1.8257418583505538, 0.923469387755102, 0.25016339869281046, 0),
    (&[5, 11], &[6, 10], 1.0, 0.75, 0.13333333333333333, 0),
    (&[-1, 13, 1, -4, 17, -1], &[-2, 13, 2, -5, 18, 1], 1.1547005383792515, 0.9802712700369913, 0.5425925925925926, 0),
    (&[13, 13, 7], &[14, 14, 9], 1.4142135623730951, 0.64, 0.12169312169312169, 0),
    (&[0, 18], &[1, 19], 1.0, 0.9876543209876543, 0.5263157894736842, 0),
    (&[7, 4, 0], &[4, 5, 1], 1.9148542155126762, -0.2692307692307692, 0.65, 0),
    (&[0, 7, 2, -5, 6, 11, 3], &[1, 7, 4, -5, 6, 8, 0], 1.8126539343499315, 0.8203125, 0.3125, 1),
    (&[14, 14], &[14, 16], 1.4142135623730951, -1.0, 0.0625, 0),
    (&[6, 3, 11, 18], &[6, 4, 10, 17], 0.8660254037844386, 0.9696202531645569, 0.10220588235294117, 0),
    (&[-2, -1, 4, -5, 19, 9, 5], &[0, -4, 3, -5, 18, 6, 7], 2.0, 0.9242658423493045, 0.32076719576719576, 1),
    (&[-6, 16, 1, 14, 4], &[-4, 17, 0, 14, 1], 1.7320508075688772, 0.9565469293163383, 0.8897058823529411, 1),
    (&[9, 6, 19, 9], &[11, 3, 19, 9], 1.8027756377319946, 0.9007633587786259, 0.29545454545454547, 0),
    (&[7, -3], &[8, -3], 0.7071067811865476, 0.9834710743801653, 0.0625, 0),
    (&[17, 4, -1, 5, 3, 16], &[14, 6, -1, 5, 3, 17], 1.5275252316519468, 0.94, 0.10107376283846872, 0),
    (&[15, 0], &[15, -1], 0.7071067811865476, 0.9921875, 0.5, 0),
];

pub fn fixtures_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Test R² in view space for the three learners on one split seed.
#[derive(Debug, Clone, Copy)]
pub struct LearnScores {
    pub seed: u64,
    pub tree: f64,
    pub forest: f64,
    pub gbt: f64,
}

/// The tree shape used for the learnability check. Deeper than the library
/// default, which underfits the generator (see the README).
pub fn learn_tree_params() -> tubepulse_core::TreeParams {
    tubepulse_core::TreeParams {
        max_depth: 12,
        min_samples_leaf: 2,
        min_gain: 0.0,
    }
}

pub fn learn_scores(data: &tubepulse_core::FeatureMatrix, seed: u64) -> LearnScores {
    use tubepulse_core::eval::evaluate;
    use tubepulse_core::{ForestParams, ModelSpec, TargetTransform};
    let tree = learn_tree_params();
    let score = |spec: ModelSpec| {
        let (_, report) = evaluate(&spec, data, 0.7, seed, TargetTransform::Log1p).unwrap();
        report.raw.test.r2
    };
    LearnScores {
        seed,
        tree: score(ModelSpec::Tree(tree)),
        forest: score(ModelSpec::Forest(ForestParams {
            feature_fraction: 0.6,
            tree,
            ..ForestParams::default()
        })),
        gbt: score(ModelSpec::Boosted(Default::default())),
    }
}

pub fn fixtures_matrix(name: &str) -> tubepulse_core::FeatureMatrix {
    let file = std::fs::File::open(fixtures_dir().join(name)).unwrap();
    let (records, _) = tubepulse_core::ingest::parse_csv(file).unwrap();
    tubepulse_core::features::build_matrix(&records, &tubepulse_core::FeatureProfile::pre_upload()).unwrap()
}
