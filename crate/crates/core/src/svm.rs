//! Soft-margin kernel SVM trained by sequential minimal optimization.
//!
//! The dual problem is solved in its minimization form
//!
//! ```text
//! min  ½ αᵀQα − Σα     s.t.  yᵀα = 0,  0 ≤ α ≤ c,     Q_ij = y_i y_j k(x_i, x_j)
//! ```
//!
//! two coordinates at a time, choosing the maximal-violating pair with
//! second-order information for the second index. Labels enter as {0, 1}
//! and are mapped to {−1, +1} internally.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market_data::Label;

/// Curvature floor for non-positive-definite pairs.
const TAU: f64 = 1e-12;
/// Kernel row cache budget in bytes.
const CACHE_BYTES: usize = 64 << 20;

#[derive(Debug, Error, PartialEq)]
pub enum SvmError {
    #[error("training data is empty")]
    EmptyData,
    #[error("training data contains a single class")]
    SingleClassData,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("solver did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Polynomial { degree: u32 },
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn validate(&self) -> Result<(), SvmError> {
        match *self {
            Kernel::Linear => Ok(()),
            Kernel::Polynomial { degree } if degree >= 1 => Ok(()),
            Kernel::Polynomial { degree } => Err(SvmError::InvalidParameter(format!(
                "polynomial degree must be >= 1, got {degree}"
            ))),
            Kernel::Rbf { gamma } if gamma > 0.0 && gamma.is_finite() => Ok(()),
            Kernel::Rbf { gamma } => Err(SvmError::InvalidParameter(format!(
                "rbf gamma must be > 0, got {gamma}"
            ))),
        }
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> Result<f64, SvmError> {
        if a.len() != b.len() {
            return Err(SvmError::DimensionMismatch {
                expected: a.len(),
                got: b.len(),
            });
        }
        Ok(self.eval_unchecked(a, b))
    }

    #[inline]
    fn eval_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(a, b),
            Kernel::Polynomial { degree } => (dot(a, b) + 1.0).powi(degree as i32),
            Kernel::Rbf { gamma } => {
                let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * sq).exp()
            }
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub kernel: Kernel,
    /// Box constraint `c`.
    pub cost: f64,
    /// Maximal KKT violation accepted at convergence.
    pub tol: f64,
    /// Pair updates before giving up; `None` uses `max(10·N·d, 100_000)`.
    pub max_iterations: Option<usize>,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            kernel: Kernel::Rbf { gamma: 0.25 },
            cost: 1.0,
            tol: 1e-3,
            max_iterations: None,
        }
    }
}

impl SvmConfig {
    pub fn rbf(cost: f64, gamma: f64) -> Self {
        Self {
            kernel: Kernel::Rbf { gamma },
            cost,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), SvmError> {
        self.kernel.validate()?;
        if !(self.cost > 0.0 && self.cost.is_finite()) {
            return Err(SvmError::InvalidParameter(format!(
                "cost must be > 0, got {}",
                self.cost
            )));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(SvmError::InvalidParameter(format!("tol must be > 0, got {}", self.tol)));
        }
        Ok(())
    }
}

/// A trained binary classifier. Only points with `α > 0` are kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub cost: f64,
    pub bias: f64,
    pub support_vectors: Vec<Vec<f64>>,
    /// `α_i · y_i` for each support vector.
    pub dual_coefs: Vec<f64>,
}

impl SvmModel {
    pub fn n_features(&self) -> usize {
        self.support_vectors.first().map_or(0, Vec::len)
    }

    /// `Σ (α_i y_i) k(x_i, x) + b`.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64, SvmError> {
        if let Some(sv) = self.support_vectors.first() {
            if sv.len() != x.len() {
                return Err(SvmError::DimensionMismatch {
                    expected: sv.len(),
                    got: x.len(),
                });
            }
        }
        let sum: f64 = self
            .support_vectors
            .iter()
            .zip(&self.dual_coefs)
            .map(|(sv, coef)| coef * self.kernel.eval_unchecked(sv, x))
            .sum();
        Ok(sum + self.bias)
    }

    /// Class 1 when the decision value is non-negative, otherwise class 0.
    pub fn predict(&self, x: &[f64]) -> Result<Label, SvmError> {
        Ok(Label::from(self.decision_value(x)? >= 0.0))
    }

    pub fn predict_all(&self, rows: &[Vec<f64>]) -> Result<Vec<Label>, SvmError> {
        rows.iter().map(|r| self.predict(r)).collect()
    }
}

/// Full solver output, including the multipliers of non-support vectors.
#[derive(Debug, Clone)]
pub struct Solution {
    pub model: SvmModel,
    /// `α_i` for every training row.
    pub alphas: Vec<f64>,
    pub iterations: usize,
    /// Final value of the maximization-form dual objective.
    pub objective: f64,
    /// Dual objective after every update, when requested.
    pub objective_trace: Vec<f64>,
}

pub fn train(x: &[Vec<f64>], y: &[Label], config: &SvmConfig) -> Result<SvmModel, SvmError> {
    Ok(solve(x, y, config, false)?.model)
}

/// Runs the solver and returns the full [`Solution`]. With `trace` set, the
/// dual objective is recorded after each pair update.
pub fn solve(x: &[Vec<f64>], y: &[Label], config: &SvmConfig, trace: bool) -> Result<Solution, SvmError> {
    config.validate()?;
    if x.is_empty() {
        return Err(SvmError::EmptyData);
    }
    if x.len() != y.len() {
        return Err(SvmError::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let dim = x[0].len();
    if let Some(bad) = x.iter().find(|r| r.len() != dim) {
        return Err(SvmError::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }
    let signs: Vec<f64> = y.iter().map(|&l| if l == 0 { -1.0 } else { 1.0 }).collect();
    if !(signs.contains(&1.0) && signs.contains(&-1.0)) {
        return Err(SvmError::SingleClassData);
    }
    let max_iterations = config
        .max_iterations
        .unwrap_or_else(|| (10 * x.len() * dim.max(1)).max(100_000));

    let mut smo = Smo::new(x, &signs, config.kernel, config.cost);
    let (iterations, objective_trace) = smo.run(config.tol, max_iterations, trace)?;
    let bias = -smo.rho();
    let objective = -smo.primal_form_objective();

    let (support_vectors, dual_coefs) = smo
        .alpha
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > 0.0)
        .map(|(i, &a)| (x[i].clone(), a * signs[i]))
        .unzip();
    Ok(Solution {
        model: SvmModel {
            kernel: config.kernel,
            cost: config.cost,
            bias,
            support_vectors,
            dual_coefs,
        },
        alphas: smo.alpha,
        iterations,
        objective,
        objective_trace,
    })
}

/// Evaluates the maximization-form dual objective
/// `Σα − ½ ΣΣ α_i α_j y_i y_j k(x_i, x_j)` directly.
pub fn dual_objective(x: &[Vec<f64>], y: &[Label], kernel: Kernel, alphas: &[f64]) -> f64 {
    let s = |l: Label| if l == 0 { -1.0 } else { 1.0 };
    let mut quad = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            quad += alphas[i] * alphas[j] * s(y[i]) * s(y[j]) * kernel.eval_unchecked(&x[i], &x[j]);
        }
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}

struct Smo<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    kernel: Kernel,
    cost: f64,
    alpha: Vec<f64>,
    /// Gradient of the minimization objective, `Qα − 1`.
    grad: Vec<f64>,
    diag: Vec<f64>,
    cache: RowCache,
}

impl<'a> Smo<'a> {
    fn new(x: &'a [Vec<f64>], y: &'a [f64], kernel: Kernel, cost: f64) -> Self {
        let n = x.len();
        let diag = x.iter().map(|r| kernel.eval_unchecked(r, r)).collect();
        Self {
            x,
            y,
            kernel,
            cost,
            alpha: vec![0.0; n],
            grad: vec![-1.0; n],
            diag,
            cache: RowCache::new(n),
        }
    }

    /// Row `i` of Q.
    fn q_row(&mut self, i: usize) -> &[f64] {
        let (x, y, kernel) = (self.x, self.y, self.kernel);
        self.cache.get_or_insert(i, || {
            x.iter()
                .zip(y)
                .map(|(xj, yj)| y[i] * yj * kernel.eval_unchecked(&x[i], xj))
                .collect()
        })
    }

    fn in_up(&self, t: usize) -> bool {
        if self.y[t] > 0.0 {
            self.alpha[t] < self.cost
        } else {
            self.alpha[t] > 0.0
        }
    }

    fn in_low(&self, t: usize) -> bool {
        if self.y[t] > 0.0 {
            self.alpha[t] > 0.0
        } else {
            self.alpha[t] < self.cost
        }
    }

    /// Returns the working pair, or `None` once the maximal violation is below `tol`.
    fn select_pair(&mut self, tol: f64) -> Option<(usize, usize)> {
        let n = self.alpha.len();
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        #[allow(clippy::needless_range_loop)]
        for t in 0..n {
            if self.in_up(t) {
                let v = -self.y[t] * self.grad[t];
                if v > gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        let i = i_sel?;
        let qi = self.q_row(i).to_vec();
        let mut gmin = f64::INFINITY;
        let mut best = f64::INFINITY;
        let mut j_sel = None;
        #[allow(clippy::needless_range_loop)]
        for t in 0..n {
            if !self.in_low(t) {
                continue;
            }
            let v = -self.y[t] * self.grad[t];
            gmin = gmin.min(v);
            let b = gmax - v;
            if b > 0.0 {
                // k_ii + k_tt − 2 k_it expressed through Q
                let a = self.diag[i] + self.diag[t] - 2.0 * self.y[i] * self.y[t] * qi[t];
                let a = if a > 0.0 { a } else { TAU };
                let score = -(b * b) / a;
                if score <= best {
                    best = score;
                    j_sel = Some(t);
                }
            }
        }
        if gmax - gmin < tol {
            return None;
        }
        j_sel.map(|j| (i, j))
    }

    fn run(&mut self, tol: f64, max_iterations: usize, trace: bool) -> Result<(usize, Vec<f64>), SvmError> {
        let mut objective_trace = Vec::new();
        if trace {
            objective_trace.push(-self.primal_form_objective());
        }
        let mut iterations = 0;
        while let Some((i, j)) = self.select_pair(tol) {
            if iterations >= max_iterations {
                return Err(SvmError::NoConvergence(max_iterations));
            }
            self.update_pair(i, j);
            iterations += 1;
            if trace {
                objective_trace.push(-self.primal_form_objective());
            }
        }
        Ok((iterations, objective_trace))
    }

    fn update_pair(&mut self, i: usize, j: usize) {
        let c = self.cost;
        let qi = self.q_row(i).to_vec();
        let qj = self.q_row(j).to_vec();
        let (old_i, old_j) = (self.alpha[i], self.alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);

        if self.y[i] != self.y[j] {
            let quad = self.diag[i] + self.diag[j] + 2.0 * qi[j];
            let quad = if quad > 0.0 { quad } else { TAU };
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let quad = self.diag[i] + self.diag[j] - 2.0 * qi[j];
            let quad = if quad > 0.0 { quad } else { TAU };
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        // Snap to the box so bound membership tests are exact.
        ai = ai.clamp(0.0, c);
        aj = aj.clamp(0.0, c);

        self.alpha[i] = ai;
        self.alpha[j] = aj;
        let (di, dj) = (ai - old_i, aj - old_j);
        for (k, g) in self.grad.iter_mut().enumerate() {
            *g += qi[k] * di + qj[k] * dj;
        }
    }

    /// Offset `rho` with decision function `Σ α_i y_i k(x_i, x) − rho`.
    fn rho(&self) -> f64 {
        let mut free_sum = 0.0;
        let mut n_free = 0usize;
        let mut ub = f64::INFINITY;
        let mut lb = f64::NEG_INFINITY;
        for t in 0..self.alpha.len() {
            let yg = self.y[t] * self.grad[t];
            let a = self.alpha[t];
            if a >= self.cost {
                if self.y[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if a <= 0.0 {
                if self.y[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                n_free += 1;
                free_sum += yg;
            }
        }
        if n_free > 0 {
            free_sum / n_free as f64
        } else {
            (ub + lb) / 2.0
        }
    }

    /// `½ αᵀQα − Σα`, evaluated from the maintained gradient.
    fn primal_form_objective(&self) -> f64 {
        0.5 * self
            .alpha
            .iter()
            .zip(&self.grad)
            .map(|(a, g)| a * (g - 1.0))
            .sum::<f64>()
    }
}

/// Bounded cache of Q rows with first-in first-out eviction.
struct RowCache {
    rows: Vec<Option<Vec<f64>>>,
    order: VecDeque<usize>,
    capacity: usize,
}

impl RowCache {
    fn new(n: usize) -> Self {
        let capacity = (CACHE_BYTES / (n.max(1) * std::mem::size_of::<f64>())).max(2);
        Self {
            rows: vec![None; n],
            order: VecDeque::new(),
            capacity,
        }
    }

    fn get_or_insert(&mut self, i: usize, compute: impl FnOnce() -> Vec<f64>) -> &[f64] {
        if self.rows[i].is_none() {
            if self.order.len() >= self.capacity {
                if let Some(old) = self.order.pop_front() {
                    self.rows[old] = None;
                }
            }
            self.rows[i] = Some(compute());
            self.order.push_back(i);
        }
        self.rows[i].as_deref().unwrap()
    }
}
