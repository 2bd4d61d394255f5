//! Wavelength importance from random-forest impurity decrease and linear
//! SVM coefficient magnitudes, min–max normalized per (target, method).

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::featurize::{assemble_features, FeatureSpec, Standardizer, Target};
use crate::model::{FittedModel, ModelKind, ModelSpec};
use crate::rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImportanceError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("requested top {k} of only {available} features")]
    KTooLarge { k: usize, available: usize },
    #[error("{0} model has no {1} importance")]
    WrongModel(&'static str, Method),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rf,
    Svm,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Rf => "rf",
            Method::Svm => "svm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn model_name(model: &FittedModel) -> &'static str {
    match model {
        FittedModel::Svr(_) => "svr",
        FittedModel::Svc(_) => "svc",
        FittedModel::Forest(_) => "rf",
        FittedModel::Network(_) => "network",
    }
}

/// `|w|` for regression; the sum of `|w|` over one-vs-rest classes for
/// classification.
pub fn svm_coefficient_importance(model: &FittedModel) -> Result<Vec<f64>, ImportanceError> {
    match model {
        FittedModel::Svr(m) => Ok(m.weights.iter().map(|w| w.abs()).collect()),
        FittedModel::Svc(m) => {
            let mut scores = vec![0.0; m.weights[0].len()];
            for w in &m.weights {
                for (s, v) in scores.iter_mut().zip(w) {
                    *s += v.abs();
                }
            }
            Ok(scores)
        }
        other => Err(ImportanceError::WrongModel(model_name(other), Method::Svm)),
    }
}

pub fn rf_importance(model: &FittedModel) -> Result<Vec<f64>, ImportanceError> {
    match model {
        FittedModel::Forest(m) => Ok(m.feature_importance()),
        other => Err(ImportanceError::WrongModel(model_name(other), Method::Rf)),
    }
}

/// Min–max scaling to [0, 1]; constant input maps to all zeros.
pub fn normalize_scores(raw: &[f64]) -> Vec<f64> {
    let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max <= min {
        return vec![0.0; raw.len()];
    }
    raw.iter().map(|v| (v - min) / (max - min)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceCurve {
    pub target: Target,
    pub method: Method,
    pub column_names: Vec<String>,
    /// Wavelength of each column, `None` for chemistry and harvest columns.
    pub wavelengths: Vec<Option<u32>>,
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
}

impl ImportanceCurve {
    pub fn new(
        target: Target,
        method: Method,
        column_names: Vec<String>,
        wavelengths: Vec<Option<u32>>,
        raw: Vec<f64>,
    ) -> Self {
        let normalized = normalize_scores(&raw);
        Self {
            target,
            method,
            column_names,
            wavelengths,
            raw,
            normalized,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedFeature {
    pub column_name: String,
    pub wavelength: Option<u32>,
    pub score: f64,
}

impl RankedFeature {
    /// Wavelength in nm, or the column name for non-spectral features.
    pub fn label(&self) -> String {
        self.wavelength
            .map_or_else(|| self.column_name.clone(), |nm| nm.to_string())
    }
}

/// The `k` highest normalized scores, descending. Ties go to the shorter
/// wavelength; non-spectral columns rank after every wavelength they tie with.
pub fn top_k_wavelengths(curve: &ImportanceCurve, k: usize) -> Result<Vec<RankedFeature>, ImportanceError> {
    if k == 0 {
        return Err(ImportanceError::ZeroK);
    }
    let d = curve.normalized.len();
    if k > d {
        return Err(ImportanceError::KTooLarge { k, available: d });
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        curve.normalized[b].total_cmp(&curve.normalized[a]).then_with(|| {
            match (curve.wavelengths[a], curve.wavelengths[b]) {
                (Some(x), Some(y)) => x.cmp(&y),
                (Some(_), None) => std::cmp::Ordering::Less,
                (None, Some(_)) => std::cmp::Ordering::Greater,
                (None, None) => a.cmp(&b),
            }
        })
    });
    Ok(order
        .into_iter()
        .take(k)
        .map(|j| RankedFeature {
            column_name: curve.column_names[j].clone(),
            wavelength: curve.wavelengths[j],
            score: curve.normalized[j],
        })
        .collect())
}

/// Trains a random forest and a linear SVM once on the full, standardized
/// dataset and returns their curves (forest first).
pub fn importance_curves(
    dataset: &Dataset,
    features: &FeatureSpec,
    spec: &ModelSpec,
    seed: u64,
) -> crate::Result<Vec<ImportanceCurve>> {
    let (x, y) = assemble_features(dataset, features)?;
    let x = Standardizer::fit(&x)?.apply(&x)?;
    let names = x.column_names().to_vec();
    let wavelengths: Vec<Option<u32>> = (0..x.n_cols()).map(|j| x.wavelength_of(j)).collect();
    let rf = spec.with_kind(ModelKind::Rf).train(&x, &y, rng::derive_seed(seed, 0))?;
    let svm = spec
        .with_kind(ModelKind::Svm)
        .train(&x, &y, rng::derive_seed(seed, 1))?;
    Ok(vec![
        ImportanceCurve::new(
            features.target,
            Method::Rf,
            names.clone(),
            wavelengths.clone(),
            rf_importance(&rf)?,
        ),
        ImportanceCurve::new(
            features.target,
            Method::Svm,
            names,
            wavelengths,
            svm_coefficient_importance(&svm)?,
        ),
    ])
}

pub const IMPORTANCE_HEADER: [&str; 6] = [
    "target",
    "method",
    "column_name",
    "wavelength_nm",
    "raw_score",
    "normalized_score",
];

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(writer: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// Long-format curves, one row per (target, method, column).
pub fn importance_csv(curves: &[ImportanceCurve]) -> String {
    let mut w = csv_writer();
    w.write_record(IMPORTANCE_HEADER).expect("in-memory write");
    for c in curves {
        for j in 0..c.raw.len() {
            w.write_record([
                c.target.name(),
                c.method.name(),
                &c.column_names[j],
                &c.wavelengths[j].map(|nm| nm.to_string()).unwrap_or_default(),
                &c.raw[j].to_string(),
                &c.normalized[j].to_string(),
            ])
            .expect("in-memory write");
        }
    }
    finish(w)
}

/// Wide ranking table: one row per rank, one column per (target, method).
pub fn topk_csv(curves: &[ImportanceCurve], k: usize) -> Result<String, ImportanceError> {
    let ranked = curves
        .iter()
        .map(|c| top_k_wavelengths(c, k))
        .collect::<Result<Vec<_>, _>>()?;
    let mut w = csv_writer();
    let mut header = vec!["rank".to_string()];
    header.extend(
        curves
            .iter()
            .map(|c| format!("{}_{}", c.target.name(), c.method.name())),
    );
    w.write_record(&header).expect("in-memory write");
    for r in 0..k {
        let mut row = vec![(r + 1).to_string()];
        row.extend(ranked.iter().map(|list| list[r].label()));
        w.write_record(&row).expect("in-memory write");
    }
    Ok(finish(w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::{LinearParams, LinearSvcModel, LinearSvrModel};
    use proptest::prelude::*;

    fn svr(weights: Vec<f64>) -> FittedModel {
        FittedModel::Svr(LinearSvrModel {
            feature_names: (0..weights.len()).map(|j| format!("x{j}")).collect(),
            weights,
            bias: 0.0,
            params: LinearParams::default(),
        })
    }

    fn curve(scores: &[f64], wavelengths: &[Option<u32>]) -> ImportanceCurve {
        ImportanceCurve::new(
            Target::Bitterness,
            Method::Svm,
            wavelengths
                .iter()
                .enumerate()
                .map(|(j, w)| w.map_or(format!("p{j}"), |nm| format!("a{nm:04}")))
                .collect(),
            wavelengths.to_vec(),
            scores.to_vec(),
        )
    }

    #[test]
    fn coefficient_magnitudes() {
        assert_eq!(
            svm_coefficient_importance(&svr(vec![0.0, 2.0, -4.0])).unwrap(),
            vec![0.0, 2.0, 4.0]
        );
        assert_eq!(svm_coefficient_importance(&svr(vec![0.0; 3])).unwrap(), vec![0.0; 3]);
        let svc = FittedModel::Svc(LinearSvcModel {
            classes: vec!["a".into(), "b".into()],
            weights: vec![vec![1.5, -0.5], vec![-1.5, 0.5]],
            biases: vec![0.0, 0.0],
            params: LinearParams::default(),
            feature_names: vec!["x0".into(), "x1".into()],
        });
        assert_eq!(svm_coefficient_importance(&svc).unwrap(), vec![3.0, 1.0]);
        assert!(rf_importance(&svc).is_err());
    }

    #[test]
    fn min_max_normalization() {
        assert_eq!(normalize_scores(&[2.0, 4.0, 6.0]), vec![0.0, 0.5, 1.0]);
        assert_eq!(normalize_scores(&[3.0, 3.0]), vec![0.0, 0.0]);
        assert_eq!(normalize_scores(&[0.0, 0.3, 1.0]), vec![0.0, 0.3, 1.0]);
    }

    #[test]
    fn ranking_ties_and_bounds() {
        let c = curve(
            &[1.0, 5.0, 5.0, 5.0, 0.0],
            &[Some(210), None, Some(204), Some(206), Some(200)],
        );
        let top = top_k_wavelengths(&c, 4).unwrap();
        let labels: Vec<String> = top.iter().map(RankedFeature::label).collect();
        assert_eq!(labels, vec!["204", "206", "p1", "210"]);
        assert_eq!(
            top_k_wavelengths(&c, 6),
            Err(ImportanceError::KTooLarge { k: 6, available: 5 })
        );
        assert_eq!(top_k_wavelengths(&c, 0), Err(ImportanceError::ZeroK));
    }

    #[test]
    fn topk_layout() {
        let a = curve(&[0.0, 1.0, 2.0], &[Some(200), Some(202), Some(204)]);
        let mut b = a.clone();
        b.method = Method::Rf;
        b.normalized.reverse();
        let text = topk_csv(&[b, a], 2).unwrap();
        assert_eq!(text, "rank,bitterness_rf,bitterness_svm\n1,200,204\n2,202,202\n");
    }

    proptest! {
        #[test]
        fn ranking_is_scale_invariant(
            scores in prop::collection::vec(0.0..10.0f64, 1..12),
            factor in 0.01..100.0f64,
        ) {
            let wavelengths: Vec<Option<u32>> = (0..scores.len()).map(|j| Some(200 + 2 * j as u32)).collect();
            let scaled: Vec<f64> = scores.iter().map(|s| s * factor).collect();
            let a = curve(&scores, &wavelengths);
            let b = curve(&scaled, &wavelengths);
            for (x, y) in a.normalized.iter().zip(&b.normalized) {
                prop_assert!((x - y).abs() < 1e-9);
            }
            let k = scores.len().min(5);
            let ta: Vec<_> = top_k_wavelengths(&a, k).unwrap().into_iter().map(|r| r.wavelength).collect();
            let tb: Vec<_> = top_k_wavelengths(&b, k).unwrap().into_iter().map(|r| r.wavelength).collect();
            // Near-ties can swap under rounding; compare only well-separated scores.
            let mut sorted = a.normalized.clone();
            sorted.sort_by(|x, y| y.total_cmp(x));
            let separated = sorted.windows(2).all(|w| w[0] - w[1] > 1e-9 || w[0] == w[1]);
            if separated {
                prop_assert_eq!(ta, tb);
            }
        }

        #[test]
        fn normalized_scores_lie_in_unit_interval(scores in prop::collection::vec(0.0..10.0f64, 1..30)) {
            let n = normalize_scores(&scores);
            prop_assert!(n.iter().all(|v| (0.0..=1.0).contains(v)));
            if scores.iter().any(|s| *s != scores[0]) {
                prop_assert_eq!(n.iter().copied().fold(0.0, f64::max), 1.0);
            }
        }
    }
}
