use serde::{Deserialize, Serialize};

use super::{check_training_data, Matrix, TreeError, TreeParams};

/// Rows with `value <= threshold` go left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRule {
    pub feature: usize,
    pub threshold: f64,
}

impl SplitRule {
    #[inline]
    pub fn goes_left(&self, row: &[f64]) -> bool {
        row[self.feature] <= self.threshold
    }
}

/// A chosen split plus its sum-of-squared-error bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub rule: SplitRule,
    pub parent_sse: f64,
    /// Left SSE + right SSE.
    pub child_sse: f64,
    pub n_left: usize,
    pub n_right: usize,
}

impl SplitCandidate {
    pub fn gain(&self) -> f64 {
        self.parent_sse - self.child_sse
    }
}

/// Relative tolerance under which two candidate splits count as tied.
/// Ties go to the lowest feature index, then the lowest threshold.
pub(crate) const TIE_TOLERANCE: f64 = 1e-12;

/// Threshold between two consecutive distinct sorted values. Always in
/// `[lo, hi)`, so `lo` goes left and `hi` goes right.
#[inline]
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let t = 0.5 * lo + 0.5 * hi;
    if t >= hi || t < lo {
        lo
    } else {
        t
    }
}

/// Running best split while features are scanned in ascending order.
pub(crate) struct SplitSearch {
    mean: f64,
    parent_sse: f64,
    tolerance: f64,
    min_leaf: usize,
    best: Option<(SplitRule, f64, usize)>,
}

impl SplitSearch {
    /// `targets` are the node's targets, one entry per (possibly repeated)
    /// training row.
    pub(crate) fn new(targets: impl Iterator<Item = f64> + Clone, min_leaf: usize) -> Self {
        let (n, sum, sumsq) = targets
            .clone()
            .fold((0usize, 0.0, 0.0), |(n, s, q), y| (n + 1, s + y, q + y * y));
        let mean = if n == 0 { 0.0 } else { sum / n as f64 };
        let parent_sse: f64 = targets.map(|y| (y - mean) * (y - mean)).sum();
        SplitSearch {
            mean,
            parent_sse,
            tolerance: TIE_TOLERANCE * sumsq,
            min_leaf,
            best: None,
        }
    }

    pub(crate) fn parent_sse(&self) -> f64 {
        self.parent_sse
    }

    /// Scans one feature. `sorted` lists the node's rows ordered by the
    /// feature's value; `value` and `target` look a row up.
    pub(crate) fn scan(
        &mut self,
        feature: usize,
        sorted: &[usize],
        value: impl Fn(usize) -> f64,
        target: impl Fn(usize) -> f64,
    ) {
        let n = sorted.len();
        if n < 2 * self.min_leaf || n < 2 {
            return;
        }
        let total: f64 = sorted.iter().map(|&r| target(r) - self.mean).sum();
        let base = total * total / n as f64;
        let mut left_sum = 0.0;
        for i in 0..n - 1 {
            left_sum += target(sorted[i]) - self.mean;
            let n_left = i + 1;
            let n_right = n - n_left;
            if n_left < self.min_leaf {
                continue;
            }
            if n_right < self.min_leaf {
                break;
            }
            let lo = value(sorted[i]);
            let hi = value(sorted[i + 1]);
            if lo == hi {
                continue;
            }
            let right_sum = total - left_sum;
            let gain = left_sum * left_sum / n_left as f64 + right_sum * right_sum / n_right as f64 - base;
            let better = match self.best {
                None => true,
                Some((_, best_gain, _)) => gain > best_gain + self.tolerance,
            };
            if better {
                self.best = Some((
                    SplitRule {
                        feature,
                        threshold: midpoint(lo, hi),
                    },
                    gain,
                    n_left,
                ));
            }
        }
    }

    /// The winning split, if it lowers SSE by more than the tie tolerance
    /// and by at least `min_gain`.
    pub(crate) fn finish(self, min_gain: f64) -> Option<(SplitRule, f64, usize)> {
        let (rule, gain, n_left) = self.best?;
        (gain > self.tolerance && gain >= min_gain).then_some((rule, gain, n_left))
    }
}

/// Finds the SSE-minimizing split of `(x, y)` over `candidate_features`.
///
/// Thresholds sit halfway between consecutive distinct values; both
/// children must hold at least `params.min_samples_leaf` rows. Returns
/// `None` when no split reduces SSE by at least `params.min_gain`.
pub fn best_split(
    x: &Matrix,
    y: &[f64],
    candidate_features: &[usize],
    params: &TreeParams,
) -> Result<Option<SplitCandidate>, TreeError> {
    if candidate_features.is_empty() {
        return Err(TreeError::Param("no candidate features".into()));
    }
    check_training_data(x, y)?;
    params.validate()?;
    if let Some(&bad) = candidate_features.iter().find(|&&f| f >= x.n_cols()) {
        return Err(TreeError::Param(format!(
            "candidate feature {bad} out of range for {} columns",
            x.n_cols()
        )));
    }
    let mut features = candidate_features.to_vec();
    features.sort_unstable();
    features.dedup();

    let mut search = SplitSearch::new(y.iter().copied(), params.min_samples_leaf);
    let mut order: Vec<usize> = (0..x.n_rows()).collect();
    for &f in &features {
        order.sort_unstable_by(|&a, &b| x.get(a, f).total_cmp(&x.get(b, f)).then(a.cmp(&b)));
        search.scan(f, &order, |r| x.get(r, f), |r| y[r]);
    }
    let parent_sse = search.parent_sse();
    let Some((rule, _, _)) = search.finish(params.min_gain) else {
        return Ok(None);
    };
    Ok(Some(exact_candidate(x, y, rule, parent_sse)))
}

/// Recomputes the child SSE of `rule` with a two-pass sum.
fn exact_candidate(x: &Matrix, y: &[f64], rule: SplitRule, parent_sse: f64) -> SplitCandidate {
    let (left, right): (Vec<f64>, Vec<f64>) = {
        let mut l = Vec::new();
        let mut r = Vec::new();
        for (i, &t) in y.iter().enumerate() {
            if rule.goes_left(x.row(i)) {
                l.push(t);
            } else {
                r.push(t);
            }
        }
        (l, r)
    };
    SplitCandidate {
        rule,
        parent_sse,
        child_sse: sse(&left) + sse(&right),
        n_left: left.len(),
        n_right: right.len(),
    }
}

pub(crate) fn sse(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - mean) * (v - mean)).sum()
}
