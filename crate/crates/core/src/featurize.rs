//! Design-matrix assembly and standardization.
//!
//! Columns are ordered: absorbances by ascending wavelength, then `tss`,
//! `ph`, `ta`, then one-hot `harvest=<category>` indicators in lexical order.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{absorbance_column, parse_absorbance_column, Dataset, Sample, WavelengthGrid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("invalid feature spec: {0}")]
    InvalidSpec(String),
    #[error("sample `{sample_id}` has no {target} label")]
    MissingLabel { sample_id: String, target: Target },
    #[error("sample `{sample_id}` has no value for `{field}`")]
    MissingField { sample_id: String, field: String },
    #[error("sample `{sample_id}` has harvest type `{value}` not seen when the layout was built")]
    UnseenCategory { sample_id: String, value: String },
    #[error("need at least {needed} rows, got {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("expected {expected} columns, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("feature matrix must be non-empty and finite with unique column names")]
    InvalidMatrix,
}

/// What a model is asked to predict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Astringency,
    Bitterness,
    Herbaceous,
    Region,
    Vineyard,
}

impl Target {
    pub const ALL: [Target; 5] = [
        Target::Astringency,
        Target::Bitterness,
        Target::Herbaceous,
        Target::Region,
        Target::Vineyard,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Target::Astringency => "astringency",
            Target::Bitterness => "bitterness",
            Target::Herbaceous => "herbaceous",
            Target::Region => "region",
            Target::Vineyard => "vineyard",
        }
    }

    pub fn is_regression(self) -> bool {
        matches!(self, Target::Astringency | Target::Bitterness | Target::Herbaceous)
    }

    /// Numeric label for regression targets, `None` when absent or categorical.
    pub fn label(self, sample: &Sample) -> Option<f64> {
        match self {
            Target::Astringency => sample.labels.astringency,
            Target::Bitterness => sample.labels.bitterness,
            Target::Herbaceous => sample.labels.herbaceous,
            Target::Region | Target::Vineyard => None,
        }
    }

    fn class(self, sample: &Sample) -> &str {
        match self {
            Target::Region => &sample.metadata.region,
            Target::Vineyard => &sample.metadata.vineyard,
            _ => "",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Target::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| {
            format!("unknown task `{s}` (expected astringency, bitterness, herbaceous, region or vineyard)")
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    /// Inclusive wavelength range in nm; `None` means the whole grid.
    pub window: Option<(u32, u32)>,
    pub include_chemistry: bool,
    pub include_harvest_type: bool,
    pub target: Target,
}

impl FeatureSpec {
    /// Absorbance only for sensory targets; absorbance plus chemistry and
    /// harvest type for origin targets.
    pub fn for_target(target: Target) -> Self {
        let origin = !target.is_regression();
        Self {
            window: None,
            include_chemistry: origin,
            include_harvest_type: origin,
            target,
        }
    }

    pub fn with_window(mut self, window: Option<(u32, u32)>) -> Self {
        self.window = window;
        self
    }

    pub fn validate(&self, grid: &WavelengthGrid) -> Result<(), FeatureError> {
        if let Some((lo, hi)) = self.window {
            if lo > hi || grid.index_of(lo).is_none() || grid.index_of(hi).is_none() {
                return Err(FeatureError::InvalidSpec(format!(
                    "window {lo}:{hi} must satisfy lo <= hi and lie on the {}-{} nm grid (step {})",
                    grid.start_nm(),
                    grid.end_nm(),
                    grid.step_nm()
                )));
            }
        }
        if self.target.is_regression() && (self.include_chemistry || self.include_harvest_type) {
            return Err(FeatureError::InvalidSpec(
                "sensory targets use absorbance features only".into(),
            ));
        }
        Ok(())
    }

    fn wavelengths(&self, grid: &WavelengthGrid) -> Vec<u32> {
        grid.wavelengths()
            .filter(|&nm| self.window.is_none_or(|(lo, hi)| nm >= lo && nm <= hi))
            .collect()
    }
}

/// Numeric design matrix with the provenance of every column.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Array2<f64>,
    column_names: Vec<String>,
    row_sample_ids: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(
        values: Array2<f64>,
        column_names: Vec<String>,
        row_sample_ids: Vec<String>,
    ) -> Result<Self, FeatureError> {
        let (n, d) = values.dim();
        let unique = column_names.iter().collect::<std::collections::HashSet<_>>().len() == d;
        if n == 0
            || d == 0
            || column_names.len() != d
            || row_sample_ids.len() != n
            || !unique
            || values.iter().any(|v| !v.is_finite())
        {
            return Err(FeatureError::InvalidMatrix);
        }
        Ok(Self {
            values,
            column_names,
            row_sample_ids,
        })
    }

    /// Builds a matrix from rows with generated names `x0, x1, ...`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, FeatureError> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(FeatureError::InvalidMatrix);
        }
        let values = Array2::from_shape_vec((n, d), rows.concat()).map_err(|_| FeatureError::InvalidMatrix)?;
        Self::new(
            values,
            (0..d).map(|j| format!("x{j}")).collect(),
            (0..n).map(|i| format!("r{i}")).collect(),
        )
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn row_sample_ids(&self) -> &[String] {
        &self.row_sample_ids
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let start = i * self.n_cols();
        &self.values.as_slice().expect("standard layout")[start..start + self.n_cols()]
    }

    /// Number of leading absorbance columns.
    pub fn spectral_width(&self) -> usize {
        self.column_names
            .iter()
            .take_while(|n| parse_absorbance_column(n).is_some())
            .count()
    }

    /// Wavelength (nm) of a column, if it is an absorbance column.
    pub fn wavelength_of(&self, column: usize) -> Option<u32> {
        parse_absorbance_column(&self.column_names[column])
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            values: self.values.select(Axis(0), rows).as_standard_layout().into_owned(),
            column_names: self.column_names.clone(),
            row_sample_ids: rows.iter().map(|&i| self.row_sample_ids[i].clone()).collect(),
        }
    }

    pub(crate) fn check_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Model targets aligned with matrix rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Targets {
    Regression(Vec<f64>),
    Classification(Vec<String>),
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::Regression(v) => v.len(),
            Targets::Classification(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn select(&self, rows: &[usize]) -> Targets {
        match self {
            Targets::Regression(v) => Targets::Regression(rows.iter().map(|&i| v[i]).collect()),
            Targets::Classification(v) => Targets::Classification(rows.iter().map(|&i| v[i].clone()).collect()),
        }
    }
}

/// Harvest categories present in `dataset`, sorted.
pub fn harvest_categories(dataset: &Dataset) -> Vec<String> {
    let mut cats: Vec<String> = dataset
        .samples()
        .iter()
        .map(|s| s.metadata.harvest_type.clone())
        .filter(|h| !h.is_empty())
        .collect();
    cats.sort();
    cats.dedup();
    cats
}

pub fn assemble_features(dataset: &Dataset, spec: &FeatureSpec) -> Result<(FeatureMatrix, Targets), FeatureError> {
    assemble_with_categories(dataset, spec, &harvest_categories(dataset))
}

/// Like [`assemble_features`] but with a fixed harvest vocabulary; a sample
/// whose harvest type is not in `categories` is an error.
pub fn assemble_with_categories(
    dataset: &Dataset,
    spec: &FeatureSpec,
    categories: &[String],
) -> Result<(FeatureMatrix, Targets), FeatureError> {
    let grid = dataset.grid();
    spec.validate(grid)?;
    if dataset.is_empty() {
        return Err(FeatureError::TooFewRows { needed: 1, found: 0 });
    }
    let wavelengths = spec.wavelengths(grid);
    let mut names: Vec<String> = wavelengths.iter().map(|&nm| absorbance_column(nm)).collect();
    if spec.include_chemistry {
        names.extend(["tss", "ph", "ta"].map(String::from));
    }
    if spec.include_harvest_type {
        names.extend(categories.iter().map(|c| format!("harvest={c}")));
    }
    let d = names.len();
    let n = dataset.len();
    let mut values = Vec::with_capacity(n * d);
    let mut regression = Vec::new();
    let mut classes = Vec::new();

    for s in dataset.samples() {
        let missing = |field: &str| FeatureError::MissingField {
            sample_id: s.sample_id.clone(),
            field: field.to_string(),
        };
        let spectrum = s.spectrum.values();
        values.extend(
            wavelengths
                .iter()
                .map(|&nm| spectrum[grid.index_of(nm).expect("window on grid")]),
        );
        if spec.include_chemistry {
            values.push(s.metadata.tss.ok_or_else(|| missing("tss"))?);
            values.push(s.metadata.ph.ok_or_else(|| missing("ph"))?);
            values.push(s.metadata.ta.ok_or_else(|| missing("ta"))?);
        }
        if spec.include_harvest_type {
            let h = &s.metadata.harvest_type;
            if h.is_empty() {
                return Err(missing("harvest_type"));
            }
            let hot = categories
                .iter()
                .position(|c| c == h)
                .ok_or_else(|| FeatureError::UnseenCategory {
                    sample_id: s.sample_id.clone(),
                    value: h.clone(),
                })?;
            values.extend((0..categories.len()).map(|k| if k == hot { 1.0 } else { 0.0 }));
        }
        if spec.target.is_regression() {
            regression.push(spec.target.label(s).ok_or_else(|| FeatureError::MissingLabel {
                sample_id: s.sample_id.clone(),
                target: spec.target,
            })?);
        } else {
            let class = spec.target.class(s);
            if class.is_empty() {
                return Err(missing(spec.target.name()));
            }
            classes.push(class.to_string());
        }
    }

    let matrix = FeatureMatrix::new(
        Array2::from_shape_vec((n, d), values).map_err(|_| FeatureError::InvalidMatrix)?,
        names,
        dataset.samples().iter().map(|s| s.sample_id.clone()).collect(),
    )?;
    let targets = if spec.target.is_regression() {
        Targets::Regression(regression)
    } else {
        Targets::Classification(classes)
    };
    Ok((matrix, targets))
}

/// Per-column mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    /// Zero-variance columns get std = 1 so they map to 0.
    pub fn fit(matrix: &FeatureMatrix) -> Result<Self, FeatureError> {
        let n = matrix.n_rows();
        if n < 2 {
            return Err(FeatureError::TooFewRows { needed: 2, found: n });
        }
        let mut means = Vec::with_capacity(matrix.n_cols());
        let mut stds = Vec::with_capacity(matrix.n_cols());
        for column in matrix.values().columns() {
            let mean = column.sum() / n as f64;
            let var = column.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            let std = var.sqrt();
            means.push(mean);
            stds.push(if std > 0.0 { std } else { 1.0 });
        }
        Ok(Self { means, stds })
    }

    pub fn apply(&self, matrix: &FeatureMatrix) -> Result<FeatureMatrix, FeatureError> {
        if matrix.n_cols() != self.means.len() {
            return Err(FeatureError::DimensionMismatch {
                expected: self.means.len(),
                found: matrix.n_cols(),
            });
        }
        let mut values = matrix.values().clone();
        for mut row in values.rows_mut() {
            for ((v, m), s) in row.iter_mut().zip(&self.means).zip(&self.stds) {
                *v = (*v - m) / s;
            }
        }
        Ok(FeatureMatrix {
            values,
            column_names: matrix.column_names.clone(),
            row_sample_ids: matrix.row_sample_ids.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_synthetic_dataset, SynthConfig};

    fn synthetic() -> Dataset {
        generate_synthetic_dataset(&SynthConfig::default()).unwrap()
    }

    #[test]
    fn full_task_two_width() {
        let ds = synthetic();
        let (m, t) = assemble_features(&ds, &FeatureSpec::for_target(Target::Region)).unwrap();
        assert_eq!(harvest_categories(&ds).len(), 2);
        assert_eq!(m.n_cols(), 201 + 3 + 2);
        assert_eq!(
            &m.column_names()[201..],
            ["tss", "ph", "ta", "harvest=hand", "harvest=machine"]
        );
        assert_eq!(m.spectral_width(), 201);
        assert!(matches!(t, Targets::Classification(ref c) if c.len() == 93));
    }

    #[test]
    fn absorbance_only_and_windowed_widths() {
        let ds = synthetic();
        let (m, t) = assemble_features(&ds, &FeatureSpec::for_target(Target::Bitterness)).unwrap();
        assert_eq!(m.n_cols(), 201);
        assert!(matches!(t, Targets::Regression(_)));
        let spec = FeatureSpec::for_target(Target::Bitterness).with_window(Some((250, 420)));
        let (m, _) = assemble_features(&ds, &spec).unwrap();
        assert_eq!(m.n_cols(), 86);
        assert_eq!(m.column_names()[0], "a0250");
        assert_eq!(m.wavelength_of(85), Some(420));
    }

    #[test]
    fn bad_specs() {
        let ds = synthetic();
        let spec = FeatureSpec::for_target(Target::Bitterness).with_window(Some((251, 420)));
        assert!(matches!(
            assemble_features(&ds, &spec),
            Err(FeatureError::InvalidSpec(_))
        ));
        let spec = FeatureSpec {
            include_chemistry: true,
            ..FeatureSpec::for_target(Target::Astringency)
        };
        assert!(matches!(
            assemble_features(&ds, &spec),
            Err(FeatureError::InvalidSpec(_))
        ));
    }

    #[test]
    fn one_hot_is_complete() {
        let ds = synthetic();
        let (m, _) = assemble_features(&ds, &FeatureSpec::for_target(Target::Vineyard)).unwrap();
        for i in 0..m.n_rows() {
            let row = m.row(i);
            assert_eq!(row[204] + row[205], 1.0);
        }
    }

    #[test]
    fn missing_label_and_unseen_category() {
        let ds = synthetic();
        let mut samples = ds.samples().to_vec();
        samples[4].labels.bitterness = None;
        let broken = Dataset::new(*ds.grid(), samples).unwrap();
        assert!(matches!(
            assemble_features(&broken, &FeatureSpec::for_target(Target::Bitterness)),
            Err(FeatureError::MissingLabel { .. })
        ));
        let err = assemble_with_categories(&ds, &FeatureSpec::for_target(Target::Region), &["hand".into()]);
        assert!(matches!(err, Err(FeatureError::UnseenCategory { .. })));
        let mut samples = ds.samples().to_vec();
        samples[0].metadata.ph = None;
        let broken = Dataset::new(*ds.grid(), samples).unwrap();
        assert!(matches!(
            assemble_features(&broken, &FeatureSpec::for_target(Target::Region)),
            Err(FeatureError::MissingField { ref field, .. }) if field == "ph"
        ));
    }

    #[test]
    fn standardizer_cases() {
        let m = FeatureMatrix::from_rows(&[vec![1.0, 5.0], vec![3.0, 5.0]]).unwrap();
        let s = Standardizer::fit(&m).unwrap();
        assert_eq!(s.means, vec![2.0, 5.0]);
        assert_eq!(s.stds, vec![1.0, 1.0]);
        let z = s.apply(&m).unwrap();
        assert_eq!(z.row(0), &[-1.0, 0.0]);
        assert_eq!(z.row(1), &[1.0, 0.0]);

        let c = FeatureMatrix::from_rows(&[vec![5.0], vec![5.0], vec![5.0]]).unwrap();
        let s = Standardizer::fit(&c).unwrap();
        assert_eq!((s.means[0], s.stds[0]), (5.0, 1.0));
        assert!(s.apply(&c).unwrap().values().iter().all(|&v| v == 0.0));

        let wide = FeatureMatrix::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
        assert!(matches!(
            s.apply(&wide),
            Err(FeatureError::DimensionMismatch { expected: 1, found: 3 })
        ));
        assert!(matches!(Standardizer::fit(&wide), Err(FeatureError::TooFewRows { .. })));
    }

    #[test]
    fn standardizing_centers_and_refit_is_identity() {
        let ds = synthetic();
        let (m, _) = assemble_features(&ds, &FeatureSpec::for_target(Target::Region)).unwrap();
        let z = Standardizer::fit(&m).unwrap().apply(&m).unwrap();
        let again = Standardizer::fit(&z).unwrap();
        for (mean, std) in again.means.iter().zip(&again.stds) {
            assert!(mean.abs() < 1e-12);
            assert!((std - 1.0).abs() < 1e-12);
        }
    }
}
