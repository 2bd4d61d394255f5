use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EvaluateError;
use crate::dataset::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CvScheme {
    /// Leave one juice out: every replicate of a juice is held out together.
    Lojo,
    /// Leave one sample out.
    Loso,
}

impl CvScheme {
    pub fn name(self) -> &'static str {
        match self {
            CvScheme::Lojo => "lojo",
            CvScheme::Loso => "loso",
        }
    }

    pub fn plan(self, dataset: &Dataset) -> Result<FoldPlan, EvaluateError> {
        match self {
            CvScheme::Lojo => split_leave_one_juice_out(dataset),
            CvScheme::Loso => split_leave_one_sample_out(dataset),
        }
    }
}

impl fmt::Display for CvScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CvScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lojo" => Ok(CvScheme::Lojo),
            "loso" => Ok(CvScheme::Loso),
            _ => Err(format!("unknown cv scheme `{s}` (expected loso or lojo)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub n_samples: usize,
    pub folds: Vec<Fold>,
}

impl FoldPlan {
    pub fn len(&self) -> usize {
        self.folds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }

    /// Checks that every fold splits `0..n` into disjoint train and test
    /// sets and that the test sets partition `0..n`.
    pub fn is_partition(&self) -> bool {
        let n = self.n_samples;
        let mut tested = vec![0usize; n];
        for fold in &self.folds {
            let mut seen = vec![false; n];
            for &i in fold.train.iter().chain(&fold.test) {
                if i >= n || seen[i] {
                    return false;
                }
                seen[i] = true;
            }
            if seen.contains(&false) {
                return false;
            }
            for &i in &fold.test {
                tested[i] += 1;
            }
        }
        tested.iter().all(|&c| c == 1)
    }
}

/// One fold per group label, in order of first appearance.
pub fn leave_one_group_out<T: Eq + std::hash::Hash>(groups: &[T]) -> Result<FoldPlan, EvaluateError> {
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut position = HashMap::new();
    for (i, g) in groups.iter().enumerate() {
        let k = *position.entry(g).or_insert_with(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        members[k].push(i);
    }
    if members.len() < 2 {
        return Err(EvaluateError::TooFewGroups(members.len()));
    }
    let n = groups.len();
    let mut owner = vec![0; n];
    for (k, m) in members.iter().enumerate() {
        for &i in m {
            owner[i] = k;
        }
    }
    let folds = members
        .into_iter()
        .enumerate()
        .map(|(k, test)| Fold {
            train: (0..n).filter(|&i| owner[i] != k).collect(),
            test,
        })
        .collect();
    Ok(FoldPlan { n_samples: n, folds })
}

pub fn split_leave_one_sample_out(dataset: &Dataset) -> Result<FoldPlan, EvaluateError> {
    let n = dataset.len();
    if n < 2 {
        return Err(EvaluateError::TooFewSamples(n));
    }
    let ids: Vec<usize> = (0..n).collect();
    leave_one_group_out(&ids)
}

pub fn split_leave_one_juice_out(dataset: &Dataset) -> Result<FoldPlan, EvaluateError> {
    let juices: Vec<&str> = dataset.samples().iter().map(|s| s.metadata.juice_id.as_str()).collect();
    leave_one_group_out(&juices)
}
