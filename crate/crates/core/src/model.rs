//! Uniform front end over the three model families.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::featurize::{FeatureMatrix, Targets};
use crate::forest::{train_random_forest, ForestParams, MaxFeatures, RfModel};
use crate::linear::{train_linear_svc, train_linear_svr, LinearParams, LinearSvcModel, LinearSvrModel};
use crate::neural::{train_network, Architecture, NetworkConfig, NetworkModel};
use crate::Result;

/// Model names in report row order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Svm,
    Rf,
    Dnn1,
    Dnn2,
    Dnn3,
    Cnn1d,
    Lstm,
    BiLstm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 8] = [
        ModelKind::Svm,
        ModelKind::Rf,
        ModelKind::Dnn1,
        ModelKind::Dnn2,
        ModelKind::Dnn3,
        ModelKind::Cnn1d,
        ModelKind::Lstm,
        ModelKind::BiLstm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Svm => "svm",
            ModelKind::Rf => "rf",
            ModelKind::Dnn1 => "dnn1",
            ModelKind::Dnn2 => "dnn2",
            ModelKind::Dnn3 => "dnn3",
            ModelKind::Cnn1d => "cnn1d",
            ModelKind::Lstm => "lstm",
            ModelKind::BiLstm => "bilstm",
        }
    }

    /// Row label used in rendered reports.
    pub fn display_name(self, regression: bool) -> &'static str {
        match self {
            ModelKind::Svm if regression => "SVR",
            ModelKind::Svm => "SVM",
            ModelKind::Rf => "RF",
            ModelKind::Dnn1 => "DNN.1",
            ModelKind::Dnn2 => "DNN.2",
            ModelKind::Dnn3 => "DNN.3",
            ModelKind::Cnn1d => "1D-CNN",
            ModelKind::Lstm => "LSTM",
            ModelKind::BiLstm => "bi-LSTM",
        }
    }

    pub fn architecture(self) -> Option<Architecture> {
        match self {
            ModelKind::Svm | ModelKind::Rf => None,
            ModelKind::Dnn1 => Some(Architecture::Mlp1),
            ModelKind::Dnn2 => Some(Architecture::Mlp2),
            ModelKind::Dnn3 => Some(Architecture::Mlp3),
            ModelKind::Cnn1d => Some(Architecture::Cnn1d),
            ModelKind::Lstm => Some(Architecture::Lstm),
            ModelKind::BiLstm => Some(Architecture::BiLstm),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown model `{s}`"))
    }
}

/// A model family plus the hyperparameters of every family, so one spec can
/// be re-targeted by changing `kind`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub linear: LinearParams,
    pub forest: ForestParams,
    /// Architecture and seed are filled in from `kind` and the training seed.
    pub network: NetworkConfig,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("invalid value `{value}` for `{key}`"))
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            linear: LinearParams::default(),
            forest: ForestParams::default(),
            network: NetworkConfig::new(kind.architecture().unwrap_or(Architecture::Mlp1)),
        }
    }

    pub fn with_kind(mut self, kind: ModelKind) -> Self {
        self.kind = kind;
        if let Some(arch) = kind.architecture() {
            self.network.architecture = arch;
        }
        self
    }

    /// Hyperparameter keys accepted by [`ModelSpec::set`].
    pub const KEYS: [&'static str; 19] = [
        "svm.c",
        "svm.epsilon",
        "svm.tol",
        "svm.max_iter",
        "rf.n_trees",
        "rf.max_features",
        "rf.min_samples_leaf",
        "rf.bootstrap",
        "rf.max_depth",
        "nn.hidden_width",
        "nn.conv_filters",
        "nn.conv_kernel",
        "nn.pool_size",
        "nn.lstm_hidden",
        "nn.learning_rate",
        "nn.beta1",
        "nn.beta2",
        "nn.epochs",
        "nn.batch_size",
    ];

    /// Overrides one hyperparameter from its textual form.
    ///
    /// `rf.max_features` takes `sqrt`, `third`, `all` or a count;
    /// `rf.max_depth` takes `none` or a depth.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let value = value.trim();
        match key {
            "svm.c" => self.linear.c = parse(key, value)?,
            "svm.epsilon" => self.linear.epsilon = parse(key, value)?,
            "svm.tol" => self.linear.tol = parse(key, value)?,
            "svm.max_iter" => self.linear.max_iter = parse(key, value)?,
            "rf.n_trees" => self.forest.n_trees = parse(key, value)?,
            "rf.max_features" => {
                self.forest.max_features = Some(match value {
                    "sqrt" => MaxFeatures::Sqrt,
                    "third" => MaxFeatures::Third,
                    "all" => MaxFeatures::All,
                    n => MaxFeatures::Count(parse(key, n)?),
                })
            }
            "rf.min_samples_leaf" => self.forest.min_samples_leaf = parse(key, value)?,
            "rf.bootstrap" => self.forest.bootstrap = parse(key, value)?,
            "rf.max_depth" => {
                self.forest.max_depth = match value {
                    "none" => None,
                    n => Some(parse(key, n)?),
                }
            }
            "nn.hidden_width" => self.network.hidden_width = parse(key, value)?,
            "nn.conv_filters" => self.network.conv_filters = parse(key, value)?,
            "nn.conv_kernel" => self.network.conv_kernel = parse(key, value)?,
            "nn.pool_size" => self.network.pool_size = parse(key, value)?,
            "nn.lstm_hidden" => self.network.lstm_hidden = parse(key, value)?,
            "nn.learning_rate" => self.network.learning_rate = parse(key, value)?,
            "nn.beta1" => self.network.beta1 = parse(key, value)?,
            "nn.beta2" => self.network.beta2 = parse(key, value)?,
            "nn.epochs" => self.network.epochs = parse(key, value)?,
            "nn.batch_size" => self.network.batch_size = parse(key, value)?,
            _ => return Err(format!("unknown hyperparameter `{key}`")),
        }
        Ok(())
    }

    pub fn train(&self, x: &FeatureMatrix, y: &Targets, seed: u64) -> Result<FittedModel> {
        Ok(match (self.kind, y) {
            (ModelKind::Svm, Targets::Regression(v)) => FittedModel::Svr(train_linear_svr(x, v, &self.linear, seed)?),
            (ModelKind::Svm, Targets::Classification(l)) => {
                FittedModel::Svc(train_linear_svc(x, l, &self.linear, seed)?)
            }
            (ModelKind::Rf, _) => FittedModel::Forest(train_random_forest(x, y, &self.forest, seed)?),
            (kind, _) => {
                let config = NetworkConfig {
                    architecture: kind.architecture().expect("network kind"),
                    seed,
                    ..self.network
                };
                FittedModel::Network(train_network(x, y, &config)?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Svr(LinearSvrModel),
    Svc(LinearSvcModel),
    Forest(RfModel),
    Network(NetworkModel),
}

impl FittedModel {
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Targets> {
        Ok(match self {
            FittedModel::Svr(m) => Targets::Regression(m.predict(x)?),
            FittedModel::Svc(m) => Targets::Classification(m.predict(x)?),
            FittedModel::Forest(m) => m.predict(x)?,
            FittedModel::Network(m) => m.predict(x)?,
        })
    }
}
