//! Small trainable networks with hand-derived gradients: MLPs with one to
//! three hidden layers, a 1-D CNN, an LSTM and a bidirectional LSTM.
//!
//! Sequence models read the leading absorbance columns of the feature
//! matrix as a single-channel sequence ordered by wavelength; any remaining
//! columns (chemistry, harvest indicators) bypass the encoder and join the
//! dense head.

mod adam;
pub mod layers;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::featurize::{FeatureMatrix, Targets};
use crate::linear::argmax_first;
use crate::rng;

pub use adam::Adam;
use layers::{Conv1d, Dense, Layout, Lstm, LstmTrace, TensorSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NeuralError {
    #[error("non-finite value in training data")]
    NonFinite,
    #[error("training loss became non-finite at epoch {epoch}")]
    DivergedLoss { epoch: usize },
    #[error("expected {expected} columns, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("need at least {needed} rows, got {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("targets have {found} entries for {expected} rows")]
    TargetLength { expected: usize, found: usize },
    #[error("invalid network configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed parameter record: {0}")]
    BadRecord(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Mlp1,
    Mlp2,
    Mlp3,
    Cnn1d,
    Lstm,
    BiLstm,
}

impl Architecture {
    pub const ALL: [Architecture; 6] = [
        Architecture::Mlp1,
        Architecture::Mlp2,
        Architecture::Mlp3,
        Architecture::Cnn1d,
        Architecture::Lstm,
        Architecture::BiLstm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::Mlp1 => "mlp1",
            Architecture::Mlp2 => "mlp2",
            Architecture::Mlp3 => "mlp3",
            Architecture::Cnn1d => "cnn1d",
            Architecture::Lstm => "lstm",
            Architecture::BiLstm => "bilstm",
        }
    }

    fn hidden_layers(self) -> usize {
        match self {
            Architecture::Mlp1 => 1,
            Architecture::Mlp2 => 2,
            Architecture::Mlp3 => 3,
            _ => 0,
        }
    }

    fn is_sequence(self) -> bool {
        matches!(self, Architecture::Cnn1d | Architecture::Lstm | Architecture::BiLstm)
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Architecture::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown architecture `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub architecture: Architecture,
    pub hidden_width: usize,
    pub conv_filters: usize,
    pub conv_kernel: usize,
    pub pool_size: usize,
    pub lstm_hidden: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl NetworkConfig {
    pub fn new(architecture: Architecture) -> Self {
        Self {
            architecture,
            hidden_width: 64,
            conv_filters: 8,
            conv_kernel: 7,
            pool_size: 2,
            lstm_hidden: 32,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epochs: 200,
            batch_size: 16,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<(), NeuralError> {
        let positive = [
            ("hidden_width", self.hidden_width),
            ("conv_filters", self.conv_filters),
            ("conv_kernel", self.conv_kernel),
            ("pool_size", self.pool_size),
            ("lstm_hidden", self.lstm_hidden),
            ("batch_size", self.batch_size),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(NeuralError::InvalidConfig(format!("{name} must be >= 1")));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(NeuralError::InvalidConfig("learning rate must be > 0".into()));
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2)) {
            return Err(NeuralError::InvalidConfig("Adam betas must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Regression heads emit one linear output; classification heads emit one
/// logit per class, read through a softmax.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Head {
    Linear,
    Softmax { classes: usize },
}

impl Head {
    fn out_dim(self) -> usize {
        match self {
            Head::Linear => 1,
            Head::Softmax { classes } => classes,
        }
    }
}

#[derive(Debug, Clone)]
enum Body {
    Mlp(Vec<Dense>),
    Cnn { conv: Conv1d, pool: usize },
    Lstm(Lstm),
    BiLstm { forward: Lstm, backward: Lstm },
}

/// Network topology: layer offsets into the flat parameter buffer.
#[derive(Debug, Clone)]
struct Net {
    body: Body,
    head: Dense,
    seq_len: usize,
    extra_len: usize,
    tensors: Vec<TensorSpec>,
    n_params: usize,
}

enum Cache {
    Mlp {
        inputs: Vec<Vec<f64>>,
        pre: Vec<Vec<f64>>,
    },
    Cnn {
        pre: Vec<f64>,
        argmax: Vec<usize>,
    },
    Lstm(LstmTrace),
    BiLstm {
        forward: LstmTrace,
        backward: LstmTrace,
        reversed: Vec<f64>,
    },
}

impl Net {
    fn build(config: &NetworkConfig, seq_len: usize, extra_len: usize, head: Head) -> Result<Self, NeuralError> {
        config.validate()?;
        let arch = config.architecture;
        if arch.is_sequence() && seq_len == 0 {
            return Err(NeuralError::InvalidConfig(format!(
                "{arch} needs absorbance columns to form its input sequence"
            )));
        }
        let mut layout = Layout::default();
        let (body, feature_len) = match arch {
            Architecture::Mlp1 | Architecture::Mlp2 | Architecture::Mlp3 => {
                let mut layers = Vec::new();
                let mut width = seq_len + extra_len;
                for k in 0..arch.hidden_layers() {
                    layers.push(Dense::new(
                        &mut layout,
                        &format!("dense{k}"),
                        width,
                        config.hidden_width,
                    ));
                    width = config.hidden_width;
                }
                (Body::Mlp(layers), width)
            }
            Architecture::Cnn1d => {
                if config.conv_kernel > seq_len {
                    return Err(NeuralError::InvalidConfig(format!(
                        "kernel {} is longer than the sequence ({seq_len})",
                        config.conv_kernel
                    )));
                }
                let conv = Conv1d::new(&mut layout, "conv", config.conv_filters, config.conv_kernel);
                let pooled = conv.out_len(seq_len) / config.pool_size;
                if pooled == 0 {
                    return Err(NeuralError::InvalidConfig("pooling leaves no outputs".into()));
                }
                (
                    Body::Cnn {
                        conv,
                        pool: config.pool_size,
                    },
                    config.conv_filters * pooled + extra_len,
                )
            }
            Architecture::Lstm => (
                Body::Lstm(Lstm::new(&mut layout, "lstm", config.lstm_hidden)),
                config.lstm_hidden + extra_len,
            ),
            Architecture::BiLstm => (
                Body::BiLstm {
                    forward: Lstm::new(&mut layout, "lstm_forward", config.lstm_hidden),
                    backward: Lstm::new(&mut layout, "lstm_backward", config.lstm_hidden),
                },
                2 * config.lstm_hidden + extra_len,
            ),
        };
        let head = Dense::new(&mut layout, "head", feature_len, head.out_dim());
        Ok(Self {
            body,
            head,
            seq_len,
            extra_len,
            n_params: layout.len,
            tensors: layout.tensors,
        })
    }

    fn init_params(&self, seed: u64) -> Vec<f64> {
        let mut rng = rng::stream(seed, 0);
        let mut params = vec![0.0; self.n_params];
        for t in &self.tensors {
            if let Some((fan_in, fan_out)) = t.fans {
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let dist = Uniform::new_inclusive(-limit, limit).expect("finite limit");
                for p in &mut params[t.range()] {
                    *p = dist.sample(&mut rng);
                }
            }
        }
        params
    }

    fn forward(&self, p: &[f64], row: &[f64]) -> (Vec<f64>, Vec<f64>, Cache) {
        let (seq, extra) = row.split_at(self.seq_len);
        let (features, cache) = match &self.body {
            Body::Mlp(layers) => {
                let mut inputs = Vec::with_capacity(layers.len());
                let mut pre = Vec::with_capacity(layers.len());
                let mut a = row.to_vec();
                for layer in layers {
                    let z = layer.forward(p, &a);
                    inputs.push(std::mem::replace(&mut a, z.iter().map(|v| v.max(0.0)).collect()));
                    pre.push(z);
                }
                (a, Cache::Mlp { inputs, pre })
            }
            Body::Cnn { conv, pool } => {
                let pre = conv.forward(p, seq);
                let out_len = conv.out_len(seq.len());
                let pooled_len = out_len / pool;
                let mut features = Vec::with_capacity(conv.filters * pooled_len + extra.len());
                let mut argmax = Vec::with_capacity(conv.filters * pooled_len);
                for f in 0..conv.filters {
                    for q in 0..pooled_len {
                        let start = f * out_len + q * pool;
                        let mut best = start;
                        for t in start + 1..start + pool {
                            if pre[t].max(0.0) > pre[best].max(0.0) {
                                best = t;
                            }
                        }
                        argmax.push(best);
                        features.push(pre[best].max(0.0));
                    }
                }
                features.extend_from_slice(extra);
                (features, Cache::Cnn { pre, argmax })
            }
            Body::Lstm(lstm) => {
                let trace = lstm.forward(p, seq);
                let mut features = trace.final_hidden(lstm.hidden).to_vec();
                features.extend_from_slice(extra);
                (features, Cache::Lstm(trace))
            }
            Body::BiLstm { forward, backward } => {
                let reversed: Vec<f64> = seq.iter().rev().copied().collect();
                let fw = forward.forward(p, seq);
                let bw = backward.forward(p, &reversed);
                let mut features = fw.final_hidden(forward.hidden).to_vec();
                features.extend_from_slice(bw.final_hidden(backward.hidden));
                features.extend_from_slice(extra);
                (
                    features,
                    Cache::BiLstm {
                        forward: fw,
                        backward: bw,
                        reversed,
                    },
                )
            }
        };
        let logits = self.head.forward(p, &features);
        (logits, features, cache)
    }

    fn backward(&self, p: &[f64], row: &[f64], features: &[f64], cache: &Cache, dlogits: &[f64], g: &mut [f64]) {
        let dfeatures = self.head.backward(p, features, dlogits, g);
        let seq = &row[..self.seq_len];
        match (&self.body, cache) {
            (Body::Mlp(layers), Cache::Mlp { inputs, pre }) => {
                let mut da = dfeatures;
                for (k, layer) in layers.iter().enumerate().rev() {
                    let dz: Vec<f64> = da
                        .iter()
                        .zip(&pre[k])
                        .map(|(d, z)| if *z > 0.0 { *d } else { 0.0 })
                        .collect();
                    da = layer.backward(p, &inputs[k], &dz, g);
                }
            }
            (Body::Cnn { conv, .. }, Cache::Cnn { pre, argmax }) => {
                let mut dpre = vec![0.0; pre.len()];
                for (j, &t) in argmax.iter().enumerate() {
                    if pre[t] > 0.0 {
                        dpre[t] += dfeatures[j];
                    }
                }
                conv.backward(seq, &dpre, g);
            }
            (Body::Lstm(lstm), Cache::Lstm(trace)) => {
                lstm.backward(p, seq, trace, &dfeatures[..lstm.hidden], g);
            }
            (
                Body::BiLstm { forward, backward },
                Cache::BiLstm {
                    forward: fw,
                    backward: bw,
                    reversed,
                },
            ) => {
                let h = forward.hidden;
                forward.backward(p, seq, fw, &dfeatures[..h], g);
                backward.backward(p, reversed, bw, &dfeatures[h..2 * h], g);
            }
            _ => unreachable!("cache matches body"),
        }
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    exp.into_iter().map(|v| v / sum).collect()
}

/// Targets encoded for the loss: values, or class indices.
enum Encoded<'a> {
    Regression(&'a [f64]),
    Classification(Vec<usize>),
}

/// A trained (or freshly initialized) network.
#[derive(Debug, Clone)]
pub struct NetworkModel {
    config: NetworkConfig,
    head: Head,
    net: Net,
    params: Vec<f64>,
    classes: Vec<String>,
    feature_names: Vec<String>,
}

impl PartialEq for NetworkModel {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
            && self.head == other.head
            && self.params == other.params
            && self.classes == other.classes
            && self.feature_names == other.feature_names
    }
}

/// Serialized form of a network: configuration plus shape-tagged tensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkRecord {
    pub config: NetworkConfig,
    pub head: Head,
    pub sequence_length: usize,
    pub extra_inputs: usize,
    pub classes: Vec<String>,
    pub feature_names: Vec<String>,
    pub tensors: Vec<TensorRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorRecord {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

fn check_training_data(x: &FeatureMatrix, y: &Targets) -> Result<(), NeuralError> {
    if x.n_rows() == 0 {
        return Err(NeuralError::TooFewRows { needed: 1, found: 0 });
    }
    if y.len() != x.n_rows() {
        return Err(NeuralError::TargetLength {
            expected: x.n_rows(),
            found: y.len(),
        });
    }
    if !x.check_finite() {
        return Err(NeuralError::NonFinite);
    }
    if let Targets::Regression(v) = y {
        if v.iter().any(|t| !t.is_finite()) {
            return Err(NeuralError::NonFinite);
        }
    }
    Ok(())
}

impl NetworkModel {
    /// Builds a network shaped for `x` and `y` with seeded initial weights.
    pub fn initialize(x: &FeatureMatrix, y: &Targets, config: &NetworkConfig) -> Result<Self, NeuralError> {
        check_training_data(x, y)?;
        let (head, classes) = match y {
            Targets::Regression(_) => (Head::Linear, Vec::new()),
            Targets::Classification(labels) => {
                let mut classes = labels.clone();
                classes.sort();
                classes.dedup();
                (Head::Softmax { classes: classes.len() }, classes)
            }
        };
        let seq_len = if config.architecture.is_sequence() {
            x.spectral_width()
        } else {
            0
        };
        let net = Net::build(config, seq_len, x.n_cols() - seq_len, head)?;
        let params = net.init_params(config.seed);
        Ok(Self {
            config: *config,
            head,
            net,
            params,
            classes,
            feature_names: x.column_names().to_vec(),
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn tensor_names(&self) -> Vec<&str> {
        self.net.tensors.iter().map(|t| t.name.as_str()).collect()
    }

    pub fn tensor(&self, name: &str) -> Option<&[f64]> {
        let t = self.net.tensors.iter().find(|t| t.name == name)?;
        Some(&self.params[t.range()])
    }

    pub fn tensor_mut(&mut self, name: &str) -> Option<&mut [f64]> {
        let t = self.net.tensors.iter().find(|t| t.name == name)?;
        Some(&mut self.params[t.range()])
    }

    fn encode<'a>(&self, y: &'a Targets) -> Encoded<'a> {
        match y {
            Targets::Regression(v) => Encoded::Regression(v),
            Targets::Classification(labels) => Encoded::Classification(
                labels
                    .iter()
                    .map(|l| self.classes.binary_search(l).unwrap_or(usize::MAX))
                    .collect(),
            ),
        }
    }

    fn check_width(&self, x: &FeatureMatrix) -> Result<(), NeuralError> {
        if x.n_cols() != self.feature_names.len() {
            return Err(NeuralError::DimensionMismatch {
                expected: self.feature_names.len(),
                found: x.n_cols(),
            });
        }
        Ok(())
    }

    /// Loss of one row and `∂loss/∂logits`, both scaled by `scale`.
    fn row_loss(&self, logits: &[f64], target: usize, y: &Encoded<'_>, scale: f64) -> (f64, Vec<f64>) {
        match y {
            Encoded::Regression(v) => {
                let r = logits[0] - v[target];
                (scale * r * r, vec![scale * 2.0 * r])
            }
            Encoded::Classification(c) => {
                let probs = softmax(logits);
                let k = c[target];
                let mut d: Vec<f64> = probs.iter().map(|p| scale * p).collect();
                let p_true = if k < probs.len() {
                    d[k] -= scale;
                    probs[k]
                } else {
                    0.0
                };
                (-scale * p_true.max(f64::MIN_POSITIVE).ln(), d)
            }
        }
    }

    /// Mean loss over `rows` and its gradient with respect to every parameter.
    fn batch_gradient(&self, params: &[f64], x: &FeatureMatrix, y: &Encoded<'_>, rows: &[usize]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; params.len()];
        let scale = 1.0 / rows.len() as f64;
        let mut loss = 0.0;
        for &i in rows {
            let row = x.row(i);
            let (logits, features, cache) = self.net.forward(params, row);
            let (l, dlogits) = self.row_loss(&logits, i, y, scale);
            loss += l;
            self.net.backward(params, row, &features, &cache, &dlogits, &mut grad);
        }
        (loss, grad)
    }

    fn batch_loss(&self, params: &[f64], x: &FeatureMatrix, y: &Encoded<'_>) -> f64 {
        let scale = 1.0 / x.n_rows() as f64;
        (0..x.n_rows())
            .map(|i| {
                let (logits, _, _) = self.net.forward(params, x.row(i));
                self.row_loss(&logits, i, y, scale).0
            })
            .sum()
    }

    /// Mean squared error or mean cross-entropy of the current parameters.
    pub fn loss(&self, x: &FeatureMatrix, y: &Targets) -> Result<f64, NeuralError> {
        self.check_width(x)?;
        check_training_data(x, y)?;
        Ok(self.batch_loss(&self.params, x, &self.encode(y)))
    }

    /// Full-batch loss and analytic gradient.
    pub fn loss_and_gradient(&self, x: &FeatureMatrix, y: &Targets) -> Result<(f64, Vec<f64>), NeuralError> {
        self.check_width(x)?;
        check_training_data(x, y)?;
        let rows: Vec<usize> = (0..x.n_rows()).collect();
        Ok(self.batch_gradient(&self.params, x, &self.encode(y), &rows))
    }

    /// Mini-batch Adam for the configured number of epochs.
    pub fn fit(&mut self, x: &FeatureMatrix, y: &Targets) -> Result<(), NeuralError> {
        self.check_width(x)?;
        check_training_data(x, y)?;
        let encoded = self.encode(y);
        let mut adam = Adam::new(
            self.params.len(),
            self.config.learning_rate,
            self.config.beta1,
            self.config.beta2,
        );
        let mut order: Vec<usize> = (0..x.n_rows()).collect();
        let mut rng = rng::stream(self.config.seed, 1);
        let mut params = std::mem::take(&mut self.params);
        for epoch in 0..self.config.epochs {
            order.shuffle(&mut rng);
            for batch in order.chunks(self.config.batch_size) {
                let (loss, grad) = self.batch_gradient(&params, x, &encoded, batch);
                if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                    self.params = params;
                    return Err(NeuralError::DivergedLoss { epoch });
                }
                adam.step(&mut params, &grad);
            }
        }
        self.params = params;
        Ok(())
    }

    /// Raw head outputs per row.
    pub fn outputs(&self, x: &FeatureMatrix) -> Result<Vec<Vec<f64>>, NeuralError> {
        self.check_width(x)?;
        Ok((0..x.n_rows())
            .map(|i| self.net.forward(&self.params, x.row(i)).0)
            .collect())
    }

    /// Softmax class probabilities (classification heads only).
    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<Vec<f64>>, NeuralError> {
        Ok(self.outputs(x)?.iter().map(|l| softmax(l)).collect())
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Targets, NeuralError> {
        let outputs = self.outputs(x)?;
        Ok(match self.head {
            Head::Linear => Targets::Regression(outputs.into_iter().map(|o| o[0]).collect()),
            Head::Softmax { .. } => Targets::Classification(
                outputs
                    .iter()
                    .map(|l| self.classes[argmax_first(&softmax(l))].clone())
                    .collect(),
            ),
        })
    }

    /// Hidden-state trajectory of the (forward) LSTM for one row.
    pub fn lstm_trajectory(&self, row: &[f64]) -> Option<Vec<Vec<f64>>> {
        let lstm = match &self.net.body {
            Body::Lstm(l) => l,
            Body::BiLstm { forward, .. } => forward,
            _ => return None,
        };
        let seq = &row[..self.net.seq_len];
        let trace = lstm.forward(&self.params, seq);
        Some(
            (0..seq.len())
                .map(|t| trace.hidden_at(lstm.hidden, t).to_vec())
                .collect(),
        )
    }

    pub fn to_record(&self) -> NetworkRecord {
        NetworkRecord {
            config: self.config,
            head: self.head,
            sequence_length: self.net.seq_len,
            extra_inputs: self.net.extra_len,
            classes: self.classes.clone(),
            feature_names: self.feature_names.clone(),
            tensors: self
                .net
                .tensors
                .iter()
                .map(|t| TensorRecord {
                    name: t.name.clone(),
                    shape: t.shape.clone(),
                    data: self.params[t.range()].to_vec(),
                })
                .collect(),
        }
    }

    pub fn from_record(record: &NetworkRecord) -> Result<Self, NeuralError> {
        let net = Net::build(&record.config, record.sequence_length, record.extra_inputs, record.head)?;
        if record.tensors.len() != net.tensors.len() {
            return Err(NeuralError::BadRecord(
                "tensor count does not match architecture".into(),
            ));
        }
        let mut params = vec![0.0; net.n_params];
        for (spec, t) in net.tensors.iter().zip(&record.tensors) {
            if spec.name != t.name || spec.shape != t.shape || t.data.len() != spec.size() {
                return Err(NeuralError::BadRecord(format!(
                    "tensor `{}` has the wrong name or shape",
                    t.name
                )));
            }
            params[spec.range()].copy_from_slice(&t.data);
        }
        Ok(Self {
            config: record.config,
            head: record.head,
            net,
            params,
            classes: record.classes.clone(),
            feature_names: record.feature_names.clone(),
        })
    }
}

pub fn train_network(x: &FeatureMatrix, y: &Targets, config: &NetworkConfig) -> Result<NetworkModel, NeuralError> {
    let mut model = NetworkModel::initialize(x, y, config)?;
    model.fit(x, y)?;
    Ok(model)
}

/// Central-difference step used by [`gradient_check`].
pub const FD_STEP: f64 = 1e-5;

/// Analytic and central-difference gradients of the full-batch loss at the
/// same parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientComparison {
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
}

impl GradientComparison {
    /// `max |g − g_fd| / max(1e-8, |g| + |g_fd|)`.
    pub fn max_relative_error(&self) -> f64 {
        self.analytic
            .iter()
            .zip(&self.numeric)
            .map(|(a, n)| (a - n).abs() / (a.abs() + n.abs()).max(1e-8))
            .fold(0.0, f64::max)
    }

    pub fn max_absolute_error(&self) -> f64 {
        self.analytic
            .iter()
            .zip(&self.numeric)
            .map(|(a, n)| (a - n).abs())
            .fold(0.0, f64::max)
    }
}

/// Gradients of a network built from `config` for `x` and `y`.
///
/// Weights come from the seeded initialization. Biases are drawn from
/// U(−0.1, 0.1) instead of zero: with zero biases a fully inactive ReLU layer
/// leaves the next pre-activation exactly on the kink, where no finite
/// difference agrees with either one-sided derivative.
pub fn compare_gradients(
    config: &NetworkConfig,
    x: &FeatureMatrix,
    y: &Targets,
) -> Result<GradientComparison, NeuralError> {
    let mut model = NetworkModel::initialize(x, y, config)?;
    let mut rng = rng::stream(config.seed, 2);
    let jitter = Uniform::new_inclusive(-0.1, 0.1).expect("finite bounds");
    for t in model.net.tensors.iter().filter(|t| t.fans.is_none()) {
        for p in &mut model.params[t.range()] {
            *p = jitter.sample(&mut rng);
        }
    }
    let encoded = model.encode(y);
    let rows: Vec<usize> = (0..x.n_rows()).collect();
    let (_, analytic) = model.batch_gradient(&model.params, x, &encoded, &rows);
    let mut params = model.params.clone();
    let mut numeric = Vec::with_capacity(params.len());
    for k in 0..params.len() {
        let original = params[k];
        params[k] = original + FD_STEP;
        let plus = model.batch_loss(&params, x, &encoded);
        params[k] = original - FD_STEP;
        let minus = model.batch_loss(&params, x, &encoded);
        params[k] = original;
        numeric.push((plus - minus) / (2.0 * FD_STEP));
    }
    Ok(GradientComparison { analytic, numeric })
}

/// Largest relative disagreement between analytic and central-difference
/// gradients; see [`compare_gradients`].
pub fn gradient_check(config: &NetworkConfig, x: &FeatureMatrix, y: &Targets) -> Result<f64, NeuralError> {
    Ok(compare_gradients(config, x, y)?.max_relative_error())
}
