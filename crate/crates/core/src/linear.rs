//! Linear ε-insensitive support vector regression and one-vs-rest linear
//! support vector classification.
//!
//! Both are solved in the dual,
//!
//! ```text
//! min_β  ½ βᵀQβ + pᵀβ   s.t.  Σ s_t β_t = 0,  0 ≤ β_t ≤ C,   Q_tu = s_t s_u ⟨z_t, z_u⟩
//! ```
//!
//! by coordinate descent on pairs of variables (the equality constraint comes
//! from the unregularized bias, so single coordinates cannot move alone).
//! Every epoch visits the variables in a random order drawn from the seed and
//! pairs each with its best violating partner. The primal weight vector
//! `w = Σ s_t β_t z_t` is maintained alongside the dual gradient.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::featurize::FeatureMatrix;
use crate::rng;

const TAU: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinearError {
    #[error("non-finite value in training data")]
    NonFinite,
    #[error("need at least {needed} rows, got {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("classification needs at least two classes, found {0}")]
    SingleClass(usize),
    #[error("expected {expected} columns, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("targets have {found} entries for {expected} rows")]
    TargetLength { expected: usize, found: usize },
    #[error("invalid hyperparameter: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    pub c: f64,
    /// Half-width of the insensitive tube (regression only).
    pub epsilon: f64,
    pub tol: f64,
    /// Maximum number of epochs.
    pub max_iter: usize,
}

impl Default for LinearParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            epsilon: 0.1,
            tol: 1e-4,
            max_iter: 10_000,
        }
    }
}

impl LinearParams {
    fn validate(&self) -> Result<(), LinearError> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(LinearError::InvalidParams("C must be > 0".into()));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(LinearError::InvalidParams("epsilon must be >= 0".into()));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(LinearError::InvalidParams("tol must be > 0".into()));
        }
        if self.max_iter == 0 {
            return Err(LinearError::InvalidParams("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// Per-epoch record of a solver run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolverTrace {
    /// Dual objective `½‖w‖² + pᵀβ` after each epoch (minimization form).
    pub dual_objective: Vec<f64>,
    /// Primal objective of `(w, b)` recovered after each epoch.
    pub primal_objective: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvrModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub params: LinearParams,
    pub feature_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvcModel {
    pub classes: Vec<String>,
    /// One weight vector per class (one-vs-rest).
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub params: LinearParams,
    pub feature_names: Vec<String>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `½‖w‖² + C Σ max(0, |w·x + b − y| − ε)`.
pub fn svr_primal_objective(w: &[f64], b: f64, x: &FeatureMatrix, y: &[f64], c: f64, epsilon: f64) -> f64 {
    let loss: f64 = (0..x.n_rows())
        .map(|i| ((dot(w, x.row(i)) + b - y[i]).abs() - epsilon).max(0.0))
        .sum();
    0.5 * dot(w, w) + c * loss
}

/// `½‖w‖² + C Σ max(0, 1 − s(w·x + b))` with `s ∈ {−1, +1}`.
pub fn svc_primal_objective(w: &[f64], b: f64, x: &FeatureMatrix, signs: &[f64], c: f64) -> f64 {
    let loss: f64 = (0..x.n_rows())
        .map(|i| (1.0 - signs[i] * (dot(w, x.row(i)) + b)).max(0.0))
        .sum();
    0.5 * dot(w, w) + c * loss
}

/// Dual problem over `m` variables, each tied to a data row `row[t]`.
struct DualProblem<'a> {
    x: &'a FeatureMatrix,
    gram: Vec<f64>,
    row: Vec<usize>,
    sign: Vec<f64>,
    linear: Vec<f64>,
    c: f64,
}

struct DualSolution {
    weights: Vec<f64>,
    bias: f64,
}

impl DualProblem<'_> {
    fn k(&self, t: usize, u: usize) -> f64 {
        self.gram[self.row[t] * self.x.n_rows() + self.row[u]]
    }

    fn in_up(&self, beta: &[f64], t: usize) -> bool {
        if self.sign[t] > 0.0 {
            beta[t] < self.c
        } else {
            beta[t] > 0.0
        }
    }

    fn in_low(&self, beta: &[f64], t: usize) -> bool {
        if self.sign[t] > 0.0 {
            beta[t] > 0.0
        } else {
            beta[t] < self.c
        }
    }

    /// Largest KKT violation `max_up(−sG) − min_low(−sG)`.
    fn gap(&self, beta: &[f64], grad: &[f64]) -> f64 {
        let mut up = f64::NEG_INFINITY;
        let mut low = f64::INFINITY;
        for t in 0..beta.len() {
            let v = -self.sign[t] * grad[t];
            if self.in_up(beta, t) {
                up = up.max(v);
            }
            if self.in_low(beta, t) {
                low = low.min(v);
            }
        }
        up - low
    }

    fn bias(&self, beta: &[f64], grad: &[f64]) -> f64 {
        let mut ub = f64::INFINITY;
        let mut lb = f64::NEG_INFINITY;
        let mut free_sum = 0.0;
        let mut free = 0usize;
        for t in 0..beta.len() {
            let yg = self.sign[t] * grad[t];
            if beta[t] >= self.c {
                if self.sign[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if beta[t] <= 0.0 {
                if self.sign[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free += 1;
                free_sum += yg;
            }
        }
        let rho = if free > 0 {
            free_sum / free as f64
        } else if ub.is_finite() && lb.is_finite() {
            0.5 * (ub + lb)
        } else if ub.is_finite() {
            ub
        } else if lb.is_finite() {
            lb
        } else {
            0.0
        };
        -rho
    }

    fn dual_objective(&self, w: &[f64], beta: &[f64]) -> f64 {
        0.5 * dot(w, w) + dot(&self.linear, beta)
    }

    fn solve(
        &self,
        params: &LinearParams,
        seed: u64,
        primal: impl Fn(&[f64], f64) -> f64,
    ) -> (DualSolution, SolverTrace) {
        let m = self.row.len();
        let d = self.x.n_cols();
        let mut beta = vec![0.0; m];
        let mut grad = self.linear.clone();
        let mut w = vec![0.0; d];
        let mut order: Vec<usize> = (0..m).collect();
        let mut rng = rng::rng_from_seed(seed);
        let mut trace = SolverTrace::default();

        for _ in 0..params.max_iter {
            if self.gap(&beta, &grad) < params.tol {
                trace.converged = true;
                break;
            }
            order.shuffle(&mut rng);
            for &i in &order {
                let Some((up, low)) = self.partner(&beta, &grad, i, params.tol) else {
                    continue;
                };
                self.step(up, low, &mut beta, &mut grad, &mut w);
            }
            let b = self.bias(&beta, &grad);
            trace.dual_objective.push(self.dual_objective(&w, &beta));
            trace.primal_objective.push(primal(&w, b));
        }
        if !trace.converged && self.gap(&beta, &grad) < params.tol {
            trace.converged = true;
        }
        let bias = self.bias(&beta, &grad);
        (DualSolution { weights: w, bias }, trace)
    }

    /// Best violating pair containing `i`, as `(up, low)`.
    fn partner(&self, beta: &[f64], grad: &[f64], i: usize, tol: f64) -> Option<(usize, usize)> {
        let i_up = self.in_up(beta, i);
        let i_low = self.in_low(beta, i);
        let si_gi = self.sign[i] * grad[i];
        let mut best: Option<(usize, usize)> = None;
        let mut best_gain = 0.0;
        for j in 0..beta.len() {
            if j == i {
                continue;
            }
            let g = si_gi - self.sign[j] * grad[j];
            let (up, low, violation) = if g < 0.0 && i_up && self.in_low(beta, j) {
                (i, j, -g)
            } else if g > 0.0 && i_low && self.in_up(beta, j) {
                (j, i, g)
            } else {
                continue;
            };
            if violation <= tol {
                continue;
            }
            let a = self.curvature(up, low);
            let gain = violation * violation / a;
            if gain > best_gain {
                best_gain = gain;
                best = Some((up, low));
            }
        }
        best
    }

    fn curvature(&self, up: usize, low: usize) -> f64 {
        let a = self.k(up, up) + self.k(low, low) - 2.0 * self.k(up, low);
        if a > 0.0 {
            a
        } else {
            TAU
        }
    }

    /// Moves `β_up += s_up·t`, `β_low −= s_low·t` by the clipped optimal `t`.
    fn step(&self, up: usize, low: usize, beta: &mut [f64], grad: &mut [f64], w: &mut [f64]) {
        let g = self.sign[up] * grad[up] - self.sign[low] * grad[low];
        let a = self.curvature(up, low);
        let room_up = if self.sign[up] > 0.0 {
            self.c - beta[up]
        } else {
            beta[up]
        };
        let room_low = if self.sign[low] > 0.0 {
            beta[low]
        } else {
            self.c - beta[low]
        };
        let unclipped = -g / a;
        let t = unclipped.min(room_up).min(room_low);
        if t <= 0.0 {
            return;
        }
        beta[up] += self.sign[up] * t;
        beta[low] -= self.sign[low] * t;
        if t == room_up {
            beta[up] = if self.sign[up] > 0.0 { self.c } else { 0.0 };
        }
        if t == room_low {
            beta[low] = if self.sign[low] > 0.0 { 0.0 } else { self.c };
        }
        let (ru, rl) = (self.row[up], self.row[low]);
        if ru != rl {
            for ((wj, xu), xl) in w.iter_mut().zip(self.x.row(ru)).zip(self.x.row(rl)) {
                *wj += t * (xu - xl);
            }
            for k in 0..beta.len() {
                grad[k] += self.sign[k] * t * (self.k(k, up) - self.k(k, low));
            }
        }
    }
}

fn gram_matrix(x: &FeatureMatrix) -> Vec<f64> {
    let n = x.n_rows();
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = dot(x.row(i), x.row(j));
            gram[i * n + j] = v;
            gram[j * n + i] = v;
        }
    }
    gram
}

fn check_input(x: &FeatureMatrix, targets: usize, min_rows: usize) -> Result<(), LinearError> {
    if x.n_rows() < min_rows {
        return Err(LinearError::TooFewRows {
            needed: min_rows,
            found: x.n_rows(),
        });
    }
    if targets != x.n_rows() {
        return Err(LinearError::TargetLength {
            expected: x.n_rows(),
            found: targets,
        });
    }
    if !x.check_finite() {
        return Err(LinearError::NonFinite);
    }
    Ok(())
}

pub fn train_linear_svr(
    x: &FeatureMatrix,
    y: &[f64],
    params: &LinearParams,
    seed: u64,
) -> Result<LinearSvrModel, LinearError> {
    train_linear_svr_traced(x, y, params, seed).map(|(m, _)| m)
}

/// Same as [`train_linear_svr`], also returning the per-epoch trace.
pub fn train_linear_svr_traced(
    x: &FeatureMatrix,
    y: &[f64],
    params: &LinearParams,
    seed: u64,
) -> Result<(LinearSvrModel, SolverTrace), LinearError> {
    params.validate()?;
    check_input(x, y.len(), 2)?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(LinearError::NonFinite);
    }
    let n = x.n_rows();
    let problem = DualProblem {
        x,
        gram: gram_matrix(x),
        row: (0..n).chain(0..n).collect(),
        sign: [vec![1.0; n], vec![-1.0; n]].concat(),
        linear: y
            .iter()
            .map(|yi| params.epsilon - yi)
            .chain(y.iter().map(|yi| params.epsilon + yi))
            .collect(),
        c: params.c,
    };
    let (sol, trace) = problem.solve(params, seed, |w, b| {
        svr_primal_objective(w, b, x, y, params.c, params.epsilon)
    });
    Ok((
        LinearSvrModel {
            weights: sol.weights,
            bias: sol.bias,
            params: *params,
            feature_names: x.column_names().to_vec(),
        },
        trace,
    ))
}

/// Binary soft-margin problem with `signs` in {−1, +1}.
pub fn train_binary_svc_traced(
    x: &FeatureMatrix,
    signs: &[f64],
    params: &LinearParams,
    seed: u64,
) -> Result<(Vec<f64>, f64, SolverTrace), LinearError> {
    params.validate()?;
    check_input(x, signs.len(), 2)?;
    let n = x.n_rows();
    let problem = DualProblem {
        x,
        gram: gram_matrix(x),
        row: (0..n).collect(),
        sign: signs.to_vec(),
        linear: vec![-1.0; n],
        c: params.c,
    };
    let (sol, trace) = problem.solve(params, seed, |w, b| svc_primal_objective(w, b, x, signs, params.c));
    Ok((sol.weights, sol.bias, trace))
}

pub fn train_linear_svc(
    x: &FeatureMatrix,
    labels: &[String],
    params: &LinearParams,
    seed: u64,
) -> Result<LinearSvcModel, LinearError> {
    params.validate()?;
    check_input(x, labels.len(), 1)?;
    let mut classes: Vec<String> = labels.to_vec();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(LinearError::SingleClass(classes.len()));
    }
    check_input(x, labels.len(), 2)?;
    let mut weights = Vec::with_capacity(classes.len());
    let mut biases = Vec::with_capacity(classes.len());
    for (k, class) in classes.iter().enumerate() {
        let signs: Vec<f64> = labels.iter().map(|l| if l == class { 1.0 } else { -1.0 }).collect();
        let (w, b, _) = train_binary_svc_traced(x, &signs, params, rng::derive_seed(seed, k as u64))?;
        weights.push(w);
        biases.push(b);
    }
    Ok(LinearSvcModel {
        classes,
        weights,
        biases,
        params: *params,
        feature_names: x.column_names().to_vec(),
    })
}

fn check_width(expected: usize, x: &FeatureMatrix) -> Result<(), LinearError> {
    if x.n_cols() != expected {
        return Err(LinearError::DimensionMismatch {
            expected,
            found: x.n_cols(),
        });
    }
    Ok(())
}

impl LinearSvrModel {
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<f64>, LinearError> {
        check_width(self.weights.len(), x)?;
        Ok((0..x.n_rows())
            .map(|i| dot(&self.weights, x.row(i)) + self.bias)
            .collect())
    }
}

impl LinearSvcModel {
    /// One-vs-rest decision values, `rows × classes`.
    pub fn decision_function(&self, x: &FeatureMatrix) -> Result<Vec<Vec<f64>>, LinearError> {
        check_width(self.weights[0].len(), x)?;
        Ok((0..x.n_rows())
            .map(|i| {
                self.weights
                    .iter()
                    .zip(&self.biases)
                    .map(|(w, b)| dot(w, x.row(i)) + b)
                    .collect()
            })
            .collect())
    }

    /// Argmax class per row; ties go to the earlier class.
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<String>, LinearError> {
        Ok(self
            .decision_function(x)?
            .into_iter()
            .map(|scores| self.classes[argmax_first(&scores)].clone())
            .collect())
    }
}

pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = k;
        }
    }
    best
}
