//! RBF kernel machines: ε-insensitive support vector regression and
//! one-vs-rest support vector classification, both solved in the dual by
//! sequential minimal optimization.
//!
//! Slack is penalized in the conventional `C·Σξ` form, so a small `C` means a
//! simpler model. Both problems reduce to
//!
//! ```text
//! min ½ αᵀQα + pᵀα   s.t.  yᵀα = 0,  0 ≤ α ≤ C
//! ```
//!
//! with `Q_ij = y_i y_j κ(x_i, x_j)`, solved by repeatedly optimizing the
//! maximal-violating pair.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use ndarray::{Array2, ArrayView1, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data_model::{FeatureMatrix, NUM_CLASSES};
use crate::error::{invalid, Error, Result};

pub const KKT_TOLERANCE: f64 = 1e-3;
pub const MAX_PASSES: usize = 10_000;
/// Above this many rows the Gram matrix is served from an LRU row cache.
pub const FULL_GRAM_LIMIT: usize = 2_000;
const CACHE_ROWS: usize = 1_024;
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RbfKernel {
    pub gamma: f64,
}

impl RbfKernel {
    pub fn eval(&self, x: ArrayView1<f64>, z: ArrayView1<f64>) -> f64 {
        let d2: f64 = x.iter().zip(z.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
        (-self.gamma * d2).exp()
    }
}

/// `exp(−γ‖x − z‖²)`.
pub fn rbf_eval(x: &[f64], z: &[f64], gamma: f64) -> Result<f64> {
    if x.len() != z.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: z.len() });
    }
    if !(gamma >= 0.0) {
        return Err(invalid(format!("gamma must be non-negative, got {gamma}")));
    }
    let d2: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((-gamma * d2).exp())
}

/// Full kernel matrix of `x` with itself.
pub fn gram_matrix(x: &Array2<f64>, kernel: RbfKernel) -> Array2<f64> {
    let n = x.nrows();
    let mut k = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(x.row(i), x.row(j));
            k[[i, j]] = v;
            k[[j, i]] = v;
        }
    }
    k
}

enum RowStore {
    Full(Vec<Arc<[f64]>>),
    Lru { rows: HashMap<usize, Arc<[f64]>>, order: VecDeque<usize>, capacity: usize },
}

/// Kernel rows over the data points, fully precomputed for small problems.
struct KernelCache<'a> {
    x: &'a Array2<f64>,
    kernel: RbfKernel,
    store: RowStore,
}

impl<'a> KernelCache<'a> {
    fn new(x: &'a Array2<f64>, kernel: RbfKernel) -> Self {
        let n = x.nrows();
        let store = if n < FULL_GRAM_LIMIT {
            let g = gram_matrix(x, kernel);
            RowStore::Full(g.rows().into_iter().map(|r| Arc::from(r.to_vec())).collect())
        } else {
            RowStore::Lru { rows: HashMap::new(), order: VecDeque::new(), capacity: CACHE_ROWS }
        };
        KernelCache { x, kernel, store }
    }

    fn row(&mut self, i: usize) -> Arc<[f64]> {
        match &mut self.store {
            RowStore::Full(rows) => rows[i].clone(),
            RowStore::Lru { rows, order, capacity } => {
                if let Some(r) = rows.get(&i) {
                    let r = r.clone();
                    if let Some(pos) = order.iter().position(|&k| k == i) {
                        order.remove(pos);
                    }
                    order.push_back(i);
                    return r;
                }
                let xi = self.x.row(i);
                let r: Arc<[f64]> = self.x.rows().into_iter().map(|xj| self.kernel.eval(xi, xj)).collect();
                if rows.len() >= *capacity {
                    if let Some(old) = order.pop_front() {
                        rows.remove(&old);
                    }
                }
                rows.insert(i, r.clone());
                order.push_back(i);
                r
            }
        }
    }
}

/// Outcome of one dual solve.
#[derive(Debug, Clone)]
struct DualSolution {
    alpha: Vec<f64>,
    bias: f64,
    objective: f64,
    iterations: usize,
    violation: f64,
    objective_history: Vec<f64>,
}

struct DualProblem<'a> {
    cache: KernelCache<'a>,
    /// Data row behind each variable.
    base: Vec<usize>,
    y: Vec<f64>,
    p: Vec<f64>,
    c: f64,
    track: bool,
}

impl DualProblem<'_> {
    fn q_row(&mut self, i: usize) -> Vec<f64> {
        let k = self.cache.row(self.base[i]);
        let yi = self.y[i];
        self.base.iter().zip(&self.y).map(|(&b, &yt)| yi * yt * k[b]).collect()
    }

    fn solve(mut self) -> Result<DualSolution> {
        let n = self.y.len();
        let c = self.c;
        let mut alpha = vec![0.0; n];
        let mut grad = self.p.clone();
        let qd: Vec<f64> = (0..n).map(|i| self.cache.row(self.base[i])[self.base[i]]).collect();
        let max_iter = MAX_PASSES.saturating_mul(n.max(1));
        let mut history = Vec::new();
        let objective = |alpha: &[f64], grad: &[f64], p: &[f64]| -> f64 {
            -0.5 * alpha.iter().zip(grad).zip(p).map(|((a, g), p)| a * (g + p)).sum::<f64>()
        };
        let mut iterations = 0;
        let violation = loop {
            // maximal violating pair
            let mut gmax = f64::NEG_INFINITY;
            let mut i_sel = usize::MAX;
            let mut gmin = f64::INFINITY;
            let mut j_sel = usize::MAX;
            for t in 0..n {
                let v = -self.y[t] * grad[t];
                let up = (self.y[t] > 0.0 && alpha[t] < c) || (self.y[t] < 0.0 && alpha[t] > 0.0);
                let low = (self.y[t] > 0.0 && alpha[t] > 0.0) || (self.y[t] < 0.0 && alpha[t] < c);
                if up && v > gmax {
                    gmax = v;
                    i_sel = t;
                }
                if low && v < gmin {
                    gmin = v;
                    j_sel = t;
                }
            }
            let violation = if i_sel == usize::MAX || j_sel == usize::MAX { 0.0 } else { gmax - gmin };
            if violation < KKT_TOLERANCE {
                break violation.max(0.0);
            }
            if iterations >= max_iter {
                return Err(Error::Convergence { violation });
            }
            iterations += 1;
            let (i, j) = (i_sel, j_sel);
            let qi = self.q_row(i);
            let qj = self.q_row(j);
            let (old_i, old_j) = (alpha[i], alpha[j]);
            if self.y[i] != self.y[j] {
                let quad = (qd[i] + qd[j] + 2.0 * qi[j]).max(TAU);
                let delta = (-grad[i] - grad[j]) / quad;
                let diff = alpha[i] - alpha[j];
                alpha[i] += delta;
                alpha[j] += delta;
                if diff > 0.0 {
                    if alpha[j] < 0.0 {
                        alpha[j] = 0.0;
                        alpha[i] = diff;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if diff > 0.0 {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = c - diff;
                    }
                } else if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            } else {
                let quad = (qd[i] + qd[j] - 2.0 * qi[j]).max(TAU);
                let delta = (grad[i] - grad[j]) / quad;
                let sum = alpha[i] + alpha[j];
                alpha[i] -= delta;
                alpha[j] += delta;
                if sum > c {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = sum - c;
                    }
                } else if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if sum > c {
                    if alpha[j] > c {
                        alpha[j] = c;
                        alpha[i] = sum - c;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
            let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
            for t in 0..n {
                grad[t] += qi[t] * di + qj[t] * dj;
            }
            if self.track {
                history.push(objective(&alpha, &grad, &self.p));
            }
        };

        // bias from free variables, or the midpoint of the feasible interval
        let (mut ub, mut lb, mut sum_free, mut n_free) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
        for t in 0..n {
            let yg = self.y[t] * grad[t];
            if alpha[t] >= c {
                if self.y[t] < 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
            } else if alpha[t] <= 0.0 {
                if self.y[t] > 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
            } else {
                n_free += 1;
                sum_free += yg;
            }
        }
        let rho = if n_free > 0 { sum_free / n_free as f64 } else { (ub + lb) / 2.0 };
        let objective = objective(&alpha, &grad, &self.p);
        Ok(DualSolution { alpha, bias: -rho, objective, iterations, violation, objective_history: history })
    }
}

/// Solver diagnostics kept alongside a fitted machine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    /// Dual objective in maximization form.
    pub dual_objective: f64,
    pub iterations: usize,
    /// Final maximal KKT violation.
    pub kkt_violation: f64,
    /// Per-iteration dual objective, only when tracking was requested.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objective_history: Vec<f64>,
}

impl From<&DualSolution> for SolverReport {
    fn from(s: &DualSolution) -> Self {
        SolverReport {
            dual_objective: s.objective,
            iterations: s.iterations,
            kkt_violation: s.violation,
            objective_history: s.objective_history.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvrConfig {
    pub c: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub track_objective: bool,
}

impl Default for SvrConfig {
    fn default() -> Self {
        SvrConfig { c: 0.5, gamma: 0.01, epsilon: 2.0, track_objective: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub config: SvrConfig,
    pub support_vectors: Array2<f64>,
    pub support_indices: Vec<usize>,
    /// `β = α − α′` per support vector, each in `[−C, C]`.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    /// `Σ(ξ + ξ′)` implied by the fit on the training data.
    pub total_slack: f64,
    pub report: SolverReport,
}

fn check_kernel_params(c: f64, gamma: f64) -> Result<()> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(invalid(format!("C must be positive, got {c}")));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(invalid(format!("gamma must be positive, got {gamma}")));
    }
    Ok(())
}

/// ε-insensitive support vector regression.
pub fn svr_fit(x: &FeatureMatrix, y: &[f64], config: &SvrConfig) -> Result<SvrModel> {
    let m = x.n_rows();
    if m != y.len() {
        return Err(Error::DimensionMismatch { expected: m, found: y.len() });
    }
    if m < 2 {
        return Err(invalid("SVR needs at least 2 rows"));
    }
    check_kernel_params(config.c, config.gamma)?;
    if !(config.epsilon >= 0.0) {
        return Err(invalid(format!("epsilon must be non-negative, got {}", config.epsilon)));
    }
    let kernel = RbfKernel { gamma: config.gamma };
    let mut p = Vec::with_capacity(2 * m);
    p.extend(y.iter().map(|t| config.epsilon - t));
    p.extend(y.iter().map(|t| config.epsilon + t));
    let problem = DualProblem {
        cache: KernelCache::new(&x.values, kernel),
        base: (0..m).chain(0..m).collect(),
        y: std::iter::repeat_n(1.0, m).chain(std::iter::repeat_n(-1.0, m)).collect(),
        p,
        c: config.c,
        track: config.track_objective,
    };
    let sol = problem.solve()?;
    let beta: Vec<f64> = (0..m).map(|i| sol.alpha[i] - sol.alpha[i + m]).collect();
    let support_indices: Vec<usize> = (0..m).filter(|&i| beta[i] != 0.0).collect();
    let mut model = SvrModel {
        config: *config,
        support_vectors: x.values.select(Axis(0), &support_indices),
        dual_coef: support_indices.iter().map(|&i| beta[i]).collect(),
        support_indices,
        bias: sol.bias,
        total_slack: 0.0,
        report: SolverReport::from(&sol),
    };
    let fitted = model.predict(x)?;
    model.total_slack = y.iter().zip(&fitted).map(|(t, f)| ((t - f).abs() - config.epsilon).max(0.0)).sum();
    Ok(model)
}

fn kernel_expansion(x: &Array2<f64>, svs: &Array2<f64>, coef: &[f64], bias: f64, kernel: RbfKernel) -> Vec<f64> {
    x.rows()
        .into_iter()
        .map(|row| svs.rows().into_iter().zip(coef).map(|(sv, c)| c * kernel.eval(sv, row)).sum::<f64>() + bias)
        .collect()
}

impl SvrModel {
    /// `Σ βᵢ κ(xᵢ, x) + w₀`.
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        if self.support_vectors.nrows() > 0 && x.n_cols() != self.support_vectors.ncols() {
            return Err(Error::DimensionMismatch { expected: self.support_vectors.ncols(), found: x.n_cols() });
        }
        let kernel = RbfKernel { gamma: self.config.gamma };
        Ok(kernel_expansion(&x.values, &self.support_vectors, &self.dual_coef, self.bias, kernel))
    }
}

/// One binary machine separating labels `+1` from `−1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryMachine {
    pub gamma: f64,
    pub c: f64,
    pub support_vectors: Array2<f64>,
    pub support_indices: Vec<usize>,
    /// `αᵢ ∈ (0, C]` per support vector.
    pub alphas: Vec<f64>,
    /// `±1` per support vector.
    pub labels: Vec<f64>,
    pub bias: f64,
    pub report: SolverReport,
}

/// Binary C-SVC on labels in `{−1, +1}`.
pub fn svc_binary_fit(x: &FeatureMatrix, y: &[f64], c: f64, gamma: f64, track_objective: bool) -> Result<BinaryMachine> {
    let m = x.n_rows();
    if m != y.len() {
        return Err(Error::DimensionMismatch { expected: m, found: y.len() });
    }
    check_kernel_params(c, gamma)?;
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(invalid("binary labels must be +1 or -1"));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(invalid("binary SVC needs both labels present"));
    }
    let problem = DualProblem {
        cache: KernelCache::new(&x.values, RbfKernel { gamma }),
        base: (0..m).collect(),
        y: y.to_vec(),
        p: vec![-1.0; m],
        c,
        track: track_objective,
    };
    let sol = problem.solve()?;
    let support_indices: Vec<usize> = (0..m).filter(|&i| sol.alpha[i] > 0.0).collect();
    Ok(BinaryMachine {
        gamma,
        c,
        support_vectors: x.values.select(Axis(0), &support_indices),
        alphas: support_indices.iter().map(|&i| sol.alpha[i]).collect(),
        labels: support_indices.iter().map(|&i| y[i]).collect(),
        support_indices,
        bias: sol.bias,
        report: SolverReport::from(&sol),
    })
}

impl BinaryMachine {
    /// `Σ αᵢ yᵢ κ(xᵢ, x) + w₀`.
    pub fn decision(&self, x: &Array2<f64>) -> Vec<f64> {
        let coef: Vec<f64> = self.alphas.iter().zip(&self.labels).map(|(a, y)| a * y).collect();
        kernel_expansion(x, &self.support_vectors, &coef, self.bias, RbfKernel { gamma: self.gamma })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvcConfig {
    pub c: f64,
    pub gamma: f64,
}

impl Default for SvcConfig {
    fn default() -> Self {
        SvcConfig { c: 10.0, gamma: 0.01 }
    }
}

/// One-vs-rest multi-class SVC; classes absent at fit time have no machine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvcModel {
    pub config: SvcConfig,
    pub machines: Vec<Option<BinaryMachine>>,
}

pub fn svc_fit(x: &FeatureMatrix, y: &[usize], config: &SvcConfig) -> Result<SvcModel> {
    if x.n_rows() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.n_rows(), found: y.len() });
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= NUM_CLASSES) {
        return Err(invalid(format!("class label {bad} outside 0..{NUM_CLASSES}")));
    }
    let present: Vec<bool> = (0..NUM_CLASSES).map(|k| y.contains(&k)).collect();
    if present.iter().filter(|&&p| p).count() < 2 {
        return Err(invalid("need at least two classes to fit a classifier"));
    }
    check_kernel_params(config.c, config.gamma)?;
    let machines = (0..NUM_CLASSES)
        .into_par_iter()
        .map(|k| {
            if !present[k] {
                return Ok(None);
            }
            let labels: Vec<f64> = y.iter().map(|&c| if c == k { 1.0 } else { -1.0 }).collect();
            svc_binary_fit(x, &labels, config.c, config.gamma, false).map(Some)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SvcModel { config: *config, machines })
}

impl SvcModel {
    /// `M × 5` decision values; classes without a machine score `−∞`.
    pub fn decision(&self, x: &FeatureMatrix) -> Result<Array2<f64>> {
        let mut out = Array2::from_elem((x.n_rows(), NUM_CLASSES), f64::NEG_INFINITY);
        for (k, machine) in self.machines.iter().enumerate() {
            if let Some(machine) = machine {
                if machine.support_vectors.nrows() > 0 && machine.support_vectors.ncols() != x.n_cols() {
                    return Err(Error::DimensionMismatch { expected: machine.support_vectors.ncols(), found: x.n_cols() });
                }
                for (i, v) in machine.decision(&x.values).into_iter().enumerate() {
                    out[[i, k]] = v;
                }
            }
        }
        Ok(out)
    }
}

/// Argmax of the OvR decision values, ties to the lowest class.
pub fn svc_predict(model: &SvcModel, x: &FeatureMatrix) -> Result<Vec<usize>> {
    Ok(crate::linear_models::argmax_rows(&model.decision(x)?))
}
