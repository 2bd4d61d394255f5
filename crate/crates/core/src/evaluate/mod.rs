//! Metrics, leave-one-out fold plans, the cross-validation runner and
//! report rendering.

mod metrics;
mod report;
mod split;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::featurize::{assemble_features, FeatureSpec, Standardizer, Target, Targets};
use crate::model::{ModelKind, ModelSpec};
use crate::rng;

pub use metrics::{classification_metrics, regression_metrics, ClassificationMetrics, RegressionMetrics};
pub use report::{format_report, ReportFormat};
pub use split::{leave_one_group_out, split_leave_one_juice_out, split_leave_one_sample_out, CvScheme, Fold, FoldPlan};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvaluateError {
    #[error("y has {y} entries but predictions have {y_hat}")]
    LengthMismatch { y: usize, y_hat: usize },
    #[error("no predictions to score")]
    EmptyPredictions,
    #[error("true values are constant, explained variance is undefined")]
    ZeroVariance,
    #[error("leave-one-sample-out needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("leave-one-group-out needs at least 2 groups, got {0}")]
    TooFewGroups(usize),
    #[error("cannot mix regression and classification results in one report")]
    MixedLayout,
    #[error("no results to report")]
    EmptyReport,
    #[error("duplicate result for {model} / {target} / {cv}")]
    DuplicateResult {
        model: ModelKind,
        target: Target,
        cv: CvScheme,
    },
    #[error("malformed stored result: {0}")]
    MalformedResult(String),
}

/// Pooled true and predicted values, index-aligned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PredictionSet {
    Regression { y: Vec<f64>, y_hat: Vec<f64> },
    Classification { y: Vec<String>, y_hat: Vec<String> },
}

impl PredictionSet {
    pub fn new(y: Targets, y_hat: Targets) -> Result<Self, EvaluateError> {
        let set = match (y, y_hat) {
            (Targets::Regression(y), Targets::Regression(y_hat)) => PredictionSet::Regression { y, y_hat },
            (Targets::Classification(y), Targets::Classification(y_hat)) => PredictionSet::Classification { y, y_hat },
            _ => return Err(EvaluateError::MixedLayout),
        };
        let (a, b) = set.lengths();
        if a != b {
            return Err(EvaluateError::LengthMismatch { y: a, y_hat: b });
        }
        if a == 0 {
            return Err(EvaluateError::EmptyPredictions);
        }
        Ok(set)
    }

    fn lengths(&self) -> (usize, usize) {
        match self {
            PredictionSet::Regression { y, y_hat } => (y.len(), y_hat.len()),
            PredictionSet::Classification { y, y_hat } => (y.len(), y_hat.len()),
        }
    }

    pub fn len(&self) -> usize {
        self.lengths().0
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_regression(&self) -> bool {
        matches!(self, PredictionSet::Regression { .. })
    }

    /// `mae`/`rmse`/`evs` or `accuracy`/`f1`.
    pub fn metrics(&self) -> Result<BTreeMap<String, f64>, EvaluateError> {
        Ok(match self {
            PredictionSet::Regression { y, y_hat } => {
                let m = regression_metrics(y, y_hat)?;
                BTreeMap::from([("mae".into(), m.mae), ("rmse".into(), m.rmse), ("evs".into(), m.evs)])
            }
            PredictionSet::Classification { y, y_hat } => {
                let m = classification_metrics(y, y_hat)?;
                BTreeMap::from([("accuracy".into(), m.accuracy), ("f1".into(), m.f1)])
            }
        })
    }

    fn cell(&self, i: usize) -> (String, String) {
        match self {
            PredictionSet::Regression { y, y_hat } => (y[i].to_string(), y_hat[i].to_string()),
            PredictionSet::Classification { y, y_hat } => (y[i].clone(), y_hat[i].clone()),
        }
    }
}

/// Outcome of one cross-validated experiment. Predictions are pooled in
/// fold order; `sample_ids` and `folds` are aligned with them.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub task: Target,
    pub model: ModelKind,
    pub cv: CvScheme,
    pub seed: u64,
    pub metrics: BTreeMap<String, f64>,
    pub sample_ids: Vec<String>,
    pub folds: Vec<usize>,
    pub predictions: PredictionSet,
}

#[derive(Serialize, Deserialize)]
struct MetricsFile {
    task: Target,
    model: ModelKind,
    cv: CvScheme,
    seed: u64,
    n_samples: usize,
    metrics: BTreeMap<String, f64>,
}

pub const PREDICTIONS_HEADER: [&str; 4] = ["sample_id", "fold", "y", "y_hat"];

impl ResultTable {
    /// Contents of `metrics.json`.
    pub fn metrics_json(&self) -> String {
        let file = MetricsFile {
            task: self.task,
            model: self.model,
            cv: self.cv,
            seed: self.seed,
            n_samples: self.predictions.len(),
            metrics: self.metrics.clone(),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("serializable");
        text.push('\n');
        text
    }

    /// Contents of `predictions.csv`.
    pub fn predictions_csv(&self) -> String {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(PREDICTIONS_HEADER).expect("in-memory write");
        for i in 0..self.predictions.len() {
            let (y, y_hat) = self.predictions.cell(i);
            writer
                .write_record([self.sample_ids[i].as_str(), &self.folds[i].to_string(), &y, &y_hat])
                .expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    /// Rebuilds a table from its `metrics.json` and `predictions.csv`.
    pub fn from_stored(metrics_json: &str, predictions_csv: &str) -> Result<Self, EvaluateError> {
        let bad = |e: &dyn std::fmt::Display| EvaluateError::MalformedResult(e.to_string());
        let file: MetricsFile = serde_json::from_str(metrics_json).map_err(|e| bad(&e))?;
        let mut reader = csv::Reader::from_reader(predictions_csv.as_bytes());
        let header = reader.headers().map_err(|e| bad(&e))?.clone();
        if header.iter().ne(PREDICTIONS_HEADER) {
            return Err(EvaluateError::MalformedResult("unexpected predictions header".into()));
        }
        let (mut sample_ids, mut folds, mut y, mut y_hat) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for record in reader.records() {
            let record = record.map_err(|e| bad(&e))?;
            sample_ids.push(record[0].to_string());
            folds.push(record[1].parse().map_err(|e| bad(&e))?);
            y.push(record[2].to_string());
            y_hat.push(record[3].to_string());
        }
        let predictions = if file.task.is_regression() {
            let parse = |v: Vec<String>| -> Result<Vec<f64>, EvaluateError> {
                v.iter().map(|s| s.parse::<f64>().map_err(|e| bad(&e))).collect()
            };
            PredictionSet::new(Targets::Regression(parse(y)?), Targets::Regression(parse(y_hat)?))?
        } else {
            PredictionSet::new(Targets::Classification(y), Targets::Classification(y_hat))?
        };
        if predictions.len() != file.n_samples {
            return Err(EvaluateError::MalformedResult(
                "prediction count disagrees with metrics".into(),
            ));
        }
        Ok(Self {
            task: file.task,
            model: file.model,
            cv: file.cv,
            seed: file.seed,
            metrics: file.metrics,
            sample_ids,
            folds,
            predictions,
        })
    }
}

/// Cross-validates `model` on `dataset`.
///
/// Features are assembled once; per fold the standardizer is fitted on the
/// training rows only and the model is trained with a seed derived from
/// `(seed, fold index)`. Folds run in parallel and are pooled in fold order,
/// so the result does not depend on scheduling.
pub fn run_experiment(
    dataset: &Dataset,
    features: &FeatureSpec,
    model: &ModelSpec,
    cv: CvScheme,
    seed: u64,
) -> crate::Result<ResultTable> {
    let (x, y) = assemble_features(dataset, features)?;
    let plan = cv.plan(dataset)?;
    let outcomes: Vec<crate::Result<Targets>> = plan
        .folds
        .par_iter()
        .enumerate()
        .map(|(k, fold)| {
            let train = x.select_rows(&fold.train);
            let scaler = Standardizer::fit(&train)?;
            let fitted = model.train(
                &scaler.apply(&train)?,
                &y.select(&fold.train),
                rng::derive_seed(seed, k as u64),
            )?;
            fitted.predict(&scaler.apply(&x.select_rows(&fold.test))?)
        })
        .collect();

    let mut order = Vec::with_capacity(dataset.len());
    let mut fold_of = Vec::with_capacity(dataset.len());
    let mut pooled: Option<Targets> = None;
    for (k, (fold, outcome)) in plan.folds.iter().zip(outcomes).enumerate() {
        let predicted = outcome?;
        order.extend_from_slice(&fold.test);
        fold_of.extend(std::iter::repeat_n(k, fold.test.len()));
        pooled = Some(match (pooled, predicted) {
            (None, p) => p,
            (Some(Targets::Regression(mut a)), Targets::Regression(b)) => {
                a.extend(b);
                Targets::Regression(a)
            }
            (Some(Targets::Classification(mut a)), Targets::Classification(b)) => {
                a.extend(b);
                Targets::Classification(a)
            }
            _ => unreachable!("one model predicts one kind of target"),
        });
    }
    let predictions = PredictionSet::new(y.select(&order), pooled.expect("at least two folds"))?;
    Ok(ResultTable {
        task: features.target,
        model: model.kind,
        cv,
        seed,
        metrics: predictions.metrics()?,
        sample_ids: order.iter().map(|&i| dataset.samples()[i].sample_id.clone()).collect(),
        folds: fold_of,
        predictions,
    })
}
