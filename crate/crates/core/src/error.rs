use thiserror::Error;

use crate::dataset::DatasetError;
use crate::evaluate::EvaluateError;
use crate::featurize::FeatureError;
use crate::forest::ForestError;
use crate::importance::ImportanceError;
use crate::linear::LinearError;
use crate::neural::NeuralError;
use crate::synth::SynthError;

/// Crate-level error; each variant wraps the error of one module.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Linear(#[from] LinearError),
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Evaluate(#[from] EvaluateError),
    #[error(transparent)]
    Importance(#[from] ImportanceError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
