//! CART decision trees and bootstrap-aggregated random forests.
//!
//! Splits minimize the sample-weighted child impurity (Gini for
//! classification, population variance for regression). Thresholds sit at
//! midpoints between consecutive distinct feature values; rows with
//! `x <= threshold` go left.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::featurize::{FeatureMatrix, Targets};
use crate::linear::argmax_first;
use crate::rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForestError {
    #[error("non-finite value in training data")]
    NonFinite,
    #[error("need at least {needed} rows, got {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("expected {expected} columns, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("targets have {found} entries for {expected} rows")]
    TargetLength { expected: usize, found: usize },
    #[error("invalid hyperparameter: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForestTask {
    Regression,
    Classification,
}

/// Number of candidate features per split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    /// ⌈√d⌉
    Sqrt,
    /// ⌈d/3⌉
    Third,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        let k = match self {
            MaxFeatures::Sqrt => (d as f64).sqrt().ceil() as usize,
            MaxFeatures::Third => d.div_ceil(3),
            MaxFeatures::All => d,
            MaxFeatures::Count(k) => k,
        };
        k.clamp(1, d.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` picks ⌈√d⌉ for classification and ⌈d/3⌉ for regression.
    pub max_features: Option<MaxFeatures>,
    pub min_samples_leaf: usize,
    pub bootstrap: bool,
    pub max_depth: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_features: None,
            min_samples_leaf: 1,
            bootstrap: true,
            max_depth: None,
        }
    }
}

impl ForestParams {
    fn max_features_for(&self, task: ForestTask, d: usize) -> usize {
        self.max_features
            .unwrap_or(match task {
                ForestTask::Classification => MaxFeatures::Sqrt,
                ForestTask::Regression => MaxFeatures::Third,
            })
            .resolve(d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LeafValue {
    Mean(f64),
    /// Training-row count per class, in class-list order.
    Counts(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        n_samples: usize,
        impurity: f64,
    },
    Leaf {
        value: LeafValue,
        n_samples: usize,
        impurity: f64,
    },
}

impl TreeNode {
    fn n_samples(&self) -> usize {
        match self {
            TreeNode::Split { n_samples, .. } | TreeNode::Leaf { n_samples, .. } => *n_samples,
        }
    }

    fn impurity(&self) -> f64 {
        match self {
            TreeNode::Split { impurity, .. } | TreeNode::Leaf { impurity, .. } => *impurity,
        }
    }
}

/// A tree stored as a node arena; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
}

impl DecisionTree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    fn leaf_for(&self, row: &[f64]) -> &LeafValue {
        let mut node = &self.nodes[0];
        loop {
            match node {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    node = if row[*feature] <= *threshold {
                        &self.nodes[*left]
                    } else {
                        &self.nodes[*right]
                    };
                }
                TreeNode::Leaf { value, .. } => return value,
            }
        }
    }

    /// Regression output, or the index of the winning class.
    fn predict_row(&self, row: &[f64]) -> f64 {
        match self.leaf_for(row) {
            LeafValue::Mean(v) => *v,
            LeafValue::Counts(c) => {
                let as_f: Vec<f64> = c.iter().map(|&v| v as f64).collect();
                argmax_first(&as_f) as f64
            }
        }
    }

    /// Unnormalized mean decrease in impurity per feature, weighted by the
    /// fraction of training rows reaching each split.
    pub fn impurity_decrease(&self, n_features: usize) -> Vec<f64> {
        let mut scores = vec![0.0; n_features];
        let total = self.root().n_samples() as f64;
        for node in &self.nodes {
            if let TreeNode::Split {
                feature,
                left,
                right,
                n_samples,
                impurity,
                ..
            } = node
            {
                let (l, r) = (&self.nodes[*left], &self.nodes[*right]);
                let n = *n_samples as f64;
                let children = (l.n_samples() as f64 * l.impurity() + r.n_samples() as f64 * r.impurity()) / n;
                scores[*feature] += n / total * (impurity - children);
            }
        }
        scores
    }
}

/// Gini impurity `1 − Σ p_k²` of a class histogram.
pub fn gini(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

/// Population variance.
pub fn variance(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

enum Labels<'a> {
    Regression(&'a [f64]),
    Classification { class: &'a [usize], n_classes: usize },
}

struct Builder<'a> {
    x: &'a FeatureMatrix,
    y: Labels<'a>,
    max_features: usize,
    min_leaf: usize,
    max_depth: Option<usize>,
    nodes: Vec<TreeNode>,
}

struct Split {
    feature: usize,
    threshold: f64,
    /// `n_L·imp_L + n_R·imp_R`
    weighted: f64,
}

impl Builder<'_> {
    fn impurity_of(&self, rows: &[usize]) -> f64 {
        match &self.y {
            Labels::Regression(y) => {
                let values: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
                variance(&values)
            }
            Labels::Classification { class, n_classes } => gini(&histogram(rows, class, *n_classes)),
        }
    }

    fn is_pure(&self, rows: &[usize]) -> bool {
        match &self.y {
            Labels::Regression(y) => rows.iter().all(|&i| y[i] == y[rows[0]]),
            Labels::Classification { class, .. } => rows.iter().all(|&i| class[i] == class[rows[0]]),
        }
    }

    fn leaf(&self, rows: &[usize], impurity: f64) -> TreeNode {
        let value = match &self.y {
            Labels::Regression(y) => LeafValue::Mean(rows.iter().map(|&i| y[i]).sum::<f64>() / rows.len() as f64),
            Labels::Classification { class, n_classes } => LeafValue::Counts(histogram(rows, class, *n_classes)),
        };
        TreeNode::Leaf {
            value,
            n_samples: rows.len(),
            impurity,
        }
    }

    fn grow<R: Rng>(&mut self, rows: Vec<usize>, depth: usize, rng: &mut R) -> usize {
        let id = self.nodes.len();
        let impurity = self.impurity_of(&rows);
        let leaf = self.leaf(&rows, impurity);
        self.nodes.push(leaf);

        let depth_ok = self.max_depth.is_none_or(|m| depth < m);
        if !depth_ok || rows.len() < 2 * self.min_leaf || self.is_pure(&rows) {
            return id;
        }
        let Some(split) = self.choose_split(&rows, rng) else {
            return id;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&i| self.x.row(i)[split.feature] <= split.threshold);
        let n_samples = rows.len();
        drop(rows);
        let left = self.grow(left_rows, depth + 1, rng);
        let right = self.grow(right_rows, depth + 1, rng);
        self.nodes[id] = TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
            n_samples,
            impurity,
        };
        id
    }

    /// Searches `max_features` random features; if none of them admits a
    /// valid split the remaining features are tried in the same random order.
    fn choose_split<R: Rng>(&self, rows: &[usize], rng: &mut R) -> Option<Split> {
        let mut features: Vec<usize> = (0..self.x.n_cols()).collect();
        features.shuffle(rng);
        let mut best: Option<Split> = None;
        for (visited, &f) in features.iter().enumerate() {
            if visited >= self.max_features && best.is_some() {
                break;
            }
            if let Some(s) = self.best_split_on(rows, f) {
                if best.as_ref().is_none_or(|b| s.weighted < b.weighted) {
                    best = Some(s);
                }
            }
        }
        best
    }

    fn best_split_on(&self, rows: &[usize], feature: usize) -> Option<Split> {
        let mut order: Vec<(f64, usize)> = rows.iter().map(|&i| (self.x.row(i)[feature], i)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = order.len();
        let mut best: Option<Split> = None;
        let mut consider = |pos: usize, weighted: f64| {
            // pos = size of the left side
            if pos < self.min_leaf || n - pos < self.min_leaf {
                return;
            }
            let (lo, hi) = (order[pos - 1].0, order[pos].0);
            if lo >= hi {
                return;
            }
            if best.as_ref().is_none_or(|b| weighted < b.weighted) {
                let mut threshold = lo + (hi - lo) / 2.0;
                if threshold >= hi {
                    threshold = lo;
                }
                best = Some(Split {
                    feature,
                    threshold,
                    weighted,
                });
            }
        };
        match &self.y {
            Labels::Regression(y) => {
                // Centered sums keep the variance formula well conditioned.
                let mean = order.iter().map(|&(_, i)| y[i]).sum::<f64>() / n as f64;
                let total: f64 = order.iter().map(|&(_, i)| y[i] - mean).sum();
                let total_sq: f64 = order.iter().map(|&(_, i)| (y[i] - mean).powi(2)).sum();
                let (mut s, mut sq) = (0.0, 0.0);
                for pos in 1..n {
                    let v = y[order[pos - 1].1] - mean;
                    s += v;
                    sq += v * v;
                    let (nl, nr) = (pos as f64, (n - pos) as f64);
                    let left = (sq - s * s / nl).max(0.0);
                    let right = ((total_sq - sq) - (total - s).powi(2) / nr).max(0.0);
                    consider(pos, left + right);
                }
            }
            Labels::Classification { class, n_classes } => {
                let mut right = histogram(rows, class, *n_classes);
                let mut left = vec![0usize; *n_classes];
                for pos in 1..n {
                    let c = class[order[pos - 1].1];
                    left[c] += 1;
                    right[c] -= 1;
                    let weighted = pos as f64 * gini(&left) + (n - pos) as f64 * gini(&right);
                    consider(pos, weighted);
                }
            }
        }
        best
    }
}

fn histogram(rows: &[usize], class: &[usize], n_classes: usize) -> Vec<usize> {
    let mut counts = vec![0; n_classes];
    for &i in rows {
        counts[class[i]] += 1;
    }
    counts
}

/// A fitted forest. `classes` is empty for regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfModel {
    pub task: ForestTask,
    pub trees: Vec<DecisionTree>,
    pub classes: Vec<String>,
    pub params: ForestParams,
    pub seed: u64,
    pub feature_names: Vec<String>,
}

pub fn train_random_forest(
    x: &FeatureMatrix,
    y: &Targets,
    params: &ForestParams,
    seed: u64,
) -> Result<RfModel, ForestError> {
    if params.n_trees == 0 || params.min_samples_leaf == 0 {
        return Err(ForestError::InvalidParams(
            "n_trees and min_samples_leaf must be >= 1".into(),
        ));
    }
    let n = x.n_rows();
    if n < 2 {
        return Err(ForestError::TooFewRows { needed: 2, found: n });
    }
    if y.len() != n {
        return Err(ForestError::TargetLength {
            expected: n,
            found: y.len(),
        });
    }
    if !x.check_finite() {
        return Err(ForestError::NonFinite);
    }
    let (task, classes, encoded, regression) = match y {
        Targets::Regression(v) => {
            if v.iter().any(|t| !t.is_finite()) {
                return Err(ForestError::NonFinite);
            }
            (ForestTask::Regression, Vec::new(), Vec::new(), v.as_slice())
        }
        Targets::Classification(labels) => {
            let mut classes = labels.clone();
            classes.sort();
            classes.dedup();
            let encoded = labels
                .iter()
                .map(|l| classes.binary_search(l).expect("class present"))
                .collect();
            (ForestTask::Classification, classes, encoded, &[][..])
        }
    };
    let max_features = params.max_features_for(task, x.n_cols());

    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::stream(seed, t as u64);
            let rows: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let labels = match task {
                ForestTask::Regression => Labels::Regression(regression),
                ForestTask::Classification => Labels::Classification {
                    class: &encoded,
                    n_classes: classes.len(),
                },
            };
            let mut builder = Builder {
                x,
                y: labels,
                max_features,
                min_leaf: params.min_samples_leaf,
                max_depth: params.max_depth,
                nodes: Vec::new(),
            };
            builder.grow(rows, 0, &mut rng);
            DecisionTree { nodes: builder.nodes }
        })
        .collect();

    Ok(RfModel {
        task,
        trees,
        classes,
        params: *params,
        seed,
        feature_names: x.column_names().to_vec(),
    })
}

impl RfModel {
    fn check_width(&self, x: &FeatureMatrix) -> Result<(), ForestError> {
        if x.n_cols() != self.feature_names.len() {
            return Err(ForestError::DimensionMismatch {
                expected: self.feature_names.len(),
                found: x.n_cols(),
            });
        }
        Ok(())
    }

    /// Mean of tree outputs, or majority vote with ties to the earlier class.
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Targets, ForestError> {
        self.check_width(x)?;
        let rows = 0..x.n_rows();
        Ok(match self.task {
            ForestTask::Regression => Targets::Regression(
                rows.map(|i| self.trees.iter().map(|t| t.predict_row(x.row(i))).sum::<f64>() / self.trees.len() as f64)
                    .collect(),
            ),
            ForestTask::Classification => Targets::Classification(
                rows.map(|i| {
                    let mut votes = vec![0.0; self.classes.len()];
                    for t in &self.trees {
                        votes[t.predict_row(x.row(i)) as usize] += 1.0;
                    }
                    self.classes[argmax_first(&votes)].clone()
                })
                .collect(),
            ),
        })
    }

    /// Mean decrease in impurity, averaged over trees and normalized to sum
    /// to 1. All zeros when no tree has a split.
    pub fn feature_importance(&self) -> Vec<f64> {
        let d = self.feature_names.len();
        let mut total = vec![0.0; d];
        for tree in &self.trees {
            for (acc, s) in total.iter_mut().zip(tree.impurity_decrease(d)) {
                *acc += s;
            }
        }
        for v in &mut total {
            *v /= self.trees.len() as f64;
        }
        let sum: f64 = total.iter().sum();
        if sum > 0.0 {
            for v in &mut total {
                *v /= sum;
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn impurity_values() {
        assert_eq!(gini(&[5, 0]), 0.0);
        assert_eq!(gini(&[3, 3]), 0.5);
        assert_eq!(variance(&[2.0, 2.0, 2.0]), 0.0);
        assert_eq!(variance(&[0.0, 2.0]), 1.0);
    }

    #[test]
    fn single_tree_memorizes() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![(i as f64 * 1.3).sin(), i as f64 % 7.0]).collect();
        let y: Vec<f64> = (0..20).map(|i| (i as f64 * 0.9).cos() * 4.0).collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let params = ForestParams {
            n_trees: 1,
            bootstrap: false,
            max_features: Some(MaxFeatures::All),
            ..Default::default()
        };
        let m = train_random_forest(&x, &Targets::Regression(y.clone()), &params, 0).unwrap();
        assert_eq!(m.predict(&x).unwrap(), Targets::Regression(y));
    }

    #[test]
    fn root_splits_on_the_informative_feature() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let f = i as f64;
                vec![(f * 0.7).sin(), (f * 1.9).cos(), (f * 0.31).sin(), f, (f * 2.3).sin()]
            })
            .collect();
        let labels: Vec<String> = (0..40).map(|i| if i < 17 { "lo" } else { "hi" }.to_string()).collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let params = ForestParams {
            n_trees: 10,
            max_features: Some(MaxFeatures::All),
            ..Default::default()
        };
        let m = train_random_forest(&x, &Targets::Classification(labels), &params, 11).unwrap();
        for tree in &m.trees {
            let TreeNode::Split { feature, .. } = tree.root() else {
                // a bootstrap sample can be pure only if it misses a class
                continue;
            };
            assert_eq!(*feature, 3);
        }
    }

    #[test]
    fn one_row_is_too_few() {
        let x = FeatureMatrix::from_rows(&[vec![1.0]]).unwrap();
        assert_eq!(
            train_random_forest(&x, &Targets::Regression(vec![1.0]), &ForestParams::default(), 0),
            Err(ForestError::TooFewRows { needed: 2, found: 1 })
        );
    }

    fn stump(value: LeafValue) -> DecisionTree {
        DecisionTree {
            nodes: vec![TreeNode::Leaf {
                value,
                n_samples: 1,
                impurity: 0.0,
            }],
        }
    }

    #[test]
    fn voting_and_averaging() {
        let x = FeatureMatrix::from_rows(&[vec![0.0]]).unwrap();
        let base = RfModel {
            task: ForestTask::Classification,
            trees: vec![
                stump(LeafValue::Counts(vec![3, 0])),
                stump(LeafValue::Counts(vec![2, 1])),
                stump(LeafValue::Counts(vec![0, 4])),
            ],
            classes: strings(&["A", "B"]),
            params: ForestParams::default(),
            seed: 0,
            feature_names: strings(&["x0"]),
        };
        assert_eq!(base.predict(&x).unwrap(), Targets::Classification(strings(&["A"])));

        let reg = RfModel {
            task: ForestTask::Regression,
            trees: vec![stump(LeafValue::Mean(1.0)), stump(LeafValue::Mean(3.0))],
            classes: vec![],
            ..base.clone()
        };
        assert_eq!(reg.predict(&x).unwrap(), Targets::Regression(vec![2.0]));

        let same = RfModel {
            trees: vec![stump(LeafValue::Mean(1.5)); 4],
            ..reg.clone()
        };
        assert_eq!(same.predict(&x).unwrap(), Targets::Regression(vec![1.5]));

        let wide = FeatureMatrix::from_rows(&[vec![0.0, 1.0]]).unwrap();
        assert!(matches!(reg.predict(&wide), Err(ForestError::DimensionMismatch { .. })));
    }

    #[test]
    fn constant_feature_has_zero_importance() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![(i as f64 * 0.4).sin(), 7.0, i as f64]).collect();
        let y: Vec<f64> = (0..30).map(|i| (i as f64 * 0.3).sin()).collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let m = train_random_forest(&x, &Targets::Regression(y), &ForestParams::default(), 3).unwrap();
        let imp = m.feature_importance();
        assert_eq!(imp[1], 0.0);
        assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_informative_feature_gets_all_importance() {
        let x = FeatureMatrix::from_rows(&(0..12).map(|i| vec![i as f64]).collect::<Vec<_>>()).unwrap();
        let labels: Vec<String> = (0..12).map(|i| if i % 4 < 2 { "a" } else { "b" }.to_string()).collect();
        let m = train_random_forest(&x, &Targets::Classification(labels), &ForestParams::default(), 0).unwrap();
        assert_eq!(m.feature_importance(), vec![1.0]);
    }

    #[test]
    fn deterministic_forests() {
        let rows: Vec<Vec<f64>> = (0..25)
            .map(|i| vec![(i as f64).sin(), (i as f64 * 0.5).cos()])
            .collect();
        let y: Vec<f64> = (0..25).map(|i| (i as f64 * 0.2).sin()).collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let t = Targets::Regression(y);
        let a = train_random_forest(&x, &t, &ForestParams::default(), 8).unwrap();
        let b = train_random_forest(&x, &t, &ForestParams::default(), 8).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.feature_importance(), b.feature_importance());
    }

    /// Minimum of `n_L·imp_L + n_R·imp_R` over every feature and every cut
    /// between distinct values, computed directly.
    fn brute_force_best(rows: &[Vec<f64>], y: &[usize], regression: Option<&[f64]>) -> f64 {
        let d = rows[0].len();
        let mut best = f64::INFINITY;
        for f in 0..d {
            let mut values: Vec<f64> = rows.iter().map(|r| r[f]).collect();
            values.sort_by(f64::total_cmp);
            values.dedup();
            for w in values.windows(2) {
                let t = (w[0] + w[1]) / 2.0;
                let (l, r): (Vec<usize>, Vec<usize>) = (0..rows.len()).partition(|&i| rows[i][f] <= t);
                let imp = |side: &[usize]| match regression {
                    Some(v) => variance(&side.iter().map(|&i| v[i]).collect::<Vec<_>>()),
                    None => {
                        let mut counts = vec![0; 3];
                        for &i in side {
                            counts[y[i]] += 1;
                        }
                        gini(&counts)
                    }
                };
                best = best.min(l.len() as f64 * imp(&l) + r.len() as f64 * imp(&r));
            }
        }
        best
    }

    fn chosen_split_value(tree: &DecisionTree) -> Option<f64> {
        let TreeNode::Split { left, right, .. } = tree.root() else {
            return None;
        };
        let l = &tree.nodes[*left];
        let r = &tree.nodes[*right];
        Some(l.n_samples() as f64 * l.impurity() + r.n_samples() as f64 * r.impurity())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn root_split_is_optimal(
            n in 2usize..=8,
            d in 1usize..=3,
            seed in any::<u64>(),
            regression in any::<bool>(),
        ) {
            let mut r = rng::rng_from_seed(seed);
            let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| r.random_range(0..5) as f64).collect()).collect();
            let classes: Vec<usize> = (0..n).map(|_| r.random_range(0..3)).collect();
            let values: Vec<f64> = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
            let x = FeatureMatrix::from_rows(&rows).unwrap();
            let params = ForestParams { n_trees: 1, bootstrap: false, max_features: Some(MaxFeatures::All), ..Default::default() };
            let targets = if regression {
                Targets::Regression(values.clone())
            } else {
                Targets::Classification(classes.iter().map(|c| format!("c{c}")).collect())
            };
            let m = train_random_forest(&x, &targets, &params, seed).unwrap();
            let oracle = brute_force_best(&rows, &classes, regression.then_some(values.as_slice()));
            match chosen_split_value(&m.trees[0]) {
                Some(v) => prop_assert!((v - oracle).abs() < 1e-9, "{} vs {}", v, oracle),
                None => prop_assert!(oracle.is_infinite() || m.trees[0].root().impurity() == 0.0),
            }
        }
    }
}
