//! Chemometrics toolkit for UV-Vis absorbance spectra of grape juice.
//!
//! The crate covers the whole modelling pipeline:
//!
//! * [`dataset`]: spectra, juice metadata and sensory labels, CSV ingestion
//! * [`synth`]: Beer-Lambert synthetic datasets with controllable signal
//! * [`featurize`]: design-matrix assembly and per-fold standardization
//! * [`linear`]: linear ε-SVR and one-vs-rest linear SVC (dual coordinate descent)
//! * [`forest`]: CART trees and random forests with impurity importance
//! * [`neural`]: MLP, 1-D CNN, LSTM and bi-LSTM with hand-written backprop
//! * [`evaluate`]: metrics, leave-one-out splitters and the experiment runner
//! * [`importance`]: wavelength-importance curves and top-k rankings

pub mod dataset;
pub mod evaluate;
pub mod featurize;
pub mod forest;
pub mod importance;
pub mod linear;
pub mod model;
pub mod neural;
pub mod rng;
pub mod synth;

mod error;

pub use dataset::{Dataset, Sample, SampleMetadata, SensoryLabels, Spectrum, WavelengthGrid};
pub use error::{Error, Result};
pub use evaluate::{
    classification_metrics, regression_metrics, run_experiment, split_leave_one_juice_out, split_leave_one_sample_out,
    CvScheme, FoldPlan, PredictionSet, ResultTable,
};
pub use featurize::{FeatureMatrix, FeatureSpec, Standardizer, Target, Targets};
pub use model::{FittedModel, ModelKind, ModelSpec};
pub use synth::SynthConfig;
