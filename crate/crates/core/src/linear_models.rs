//! Linear models: SGD regression under the root-mean-squared-percentage-error
//! objective with polynomial features, and logistic regression (one-vs-rest
//! or multinomial).

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data_model::{ColumnKind, FeatureMatrix, NUM_CLASSES};
use crate::error::{invalid, Error, Result};
use crate::rng::seeded;

/// `sqrt(mean(((y − ŷ)/y)²))`.
pub fn rmspe(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    if y.len() != y_hat.len() {
        return Err(Error::DimensionMismatch { expected: y.len(), found: y_hat.len() });
    }
    if y.is_empty() {
        return Err(invalid("rmspe of an empty set"));
    }
    if let Some(i) = y.iter().position(|&v| v == 0.0) {
        return Err(invalid(format!("rmspe undefined: target {i} is zero")));
    }
    let sum: f64 = y.iter().zip(y_hat).map(|(t, p)| ((t - p) / t).powi(2)).sum();
    Ok((sum / y.len() as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Penalty {
    L1,
    #[default]
    L2,
}

impl Penalty {
    pub fn value(self, w: ArrayView1<f64>) -> f64 {
        match self {
            Penalty::L1 => w.iter().map(|v| v.abs()).sum(),
            Penalty::L2 => w.iter().map(|v| v * v).sum(),
        }
    }

    /// Proximal step for `strength · R(w)` taken with step size folded into
    /// `strength`.
    fn prox(self, w: &mut Array1<f64>, strength: f64) {
        match self {
            Penalty::L1 => w.mapv_inplace(|v| v.signum() * (v.abs() - strength).max(0.0)),
            Penalty::L2 => w.mapv_inplace(|v| v / (1.0 + 2.0 * strength)),
        }
    }
}

impl std::str::FromStr for Penalty {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Penalty::L1),
            "l2" => Ok(Penalty::L2),
            other => Err(invalid(format!("unknown penalty `{other}`"))),
        }
    }
}

pub const MAX_POLY_DEGREE: usize = 3;

/// Monomial layout produced by [`poly_expand`]; reapplied at predict time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyExpansion {
    pub degree: usize,
    pub input_columns: Vec<String>,
    /// Each output column is the product of these input column indices;
    /// the empty product is the constant 1.
    pub monomials: Vec<Vec<usize>>,
    pub output_names: Vec<String>,
}

fn monomial_allowed(m: &[usize], kinds: &[ColumnKind]) -> bool {
    let dummies: Vec<usize> = m.iter().copied().filter(|&j| kinds[j] == ColumnKind::Dummy).collect();
    if dummies.is_empty() {
        return true;
    }
    let mut uniq = dummies.clone();
    uniq.dedup();
    uniq.len() == dummies.len() && m.len() <= 2
}

fn multisets(n: usize, size: usize, start: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if prefix.len() == size {
        out.push(prefix.clone());
        return;
    }
    for j in start..n {
        prefix.push(j);
        multisets(n, size, j, prefix, out);
        prefix.pop();
    }
}

impl PolyExpansion {
    pub fn new(x: &FeatureMatrix, degree: usize) -> Result<Self> {
        if degree > MAX_POLY_DEGREE {
            return Err(invalid(format!("polynomial degree {degree} exceeds the limit of {MAX_POLY_DEGREE}")));
        }
        let d = x.n_cols();
        let monomials: Vec<Vec<usize>> = match degree {
            0 => vec![vec![]],
            1 => (0..d).map(|j| vec![j]).collect(),
            _ => {
                let mut all = Vec::new();
                for size in 0..=degree {
                    let mut batch = Vec::new();
                    multisets(d, size, 0, &mut Vec::new(), &mut batch);
                    all.extend(batch.into_iter().filter(|m| monomial_allowed(m, &x.column_kinds)));
                }
                all
            }
        };
        let output_names = monomials
            .iter()
            .map(|m| {
                if m.is_empty() {
                    return "1".to_string();
                }
                let mut parts: Vec<String> = Vec::new();
                let mut i = 0;
                while i < m.len() {
                    let run = m[i..].iter().take_while(|&&j| j == m[i]).count();
                    let name = &x.column_names[m[i]];
                    parts.push(if run > 1 { format!("{name}^{run}") } else { name.clone() });
                    i += run;
                }
                parts.join("*")
            })
            .collect();
        Ok(PolyExpansion { degree, input_columns: x.column_names.clone(), monomials, output_names })
    }

    pub fn n_outputs(&self) -> usize {
        self.monomials.len()
    }

    pub fn apply(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        if x.column_names != self.input_columns {
            return Err(Error::DimensionMismatch { expected: self.input_columns.len(), found: x.n_cols() });
        }
        if self.degree == 1 {
            return Ok(x.clone());
        }
        let m = x.n_rows();
        let mut values = Array2::<f64>::ones((m, self.monomials.len()));
        for (k, mono) in self.monomials.iter().enumerate() {
            let mut col = values.column_mut(k);
            for &j in mono {
                col.zip_mut_with(&x.values.column(j), |a, b| *a *= b);
            }
        }
        let kinds = self
            .monomials
            .iter()
            .map(|mono| match mono.as_slice() {
                [j] => x.column_kinds[*j],
                [a, b] if x.column_kinds[*a] == ColumnKind::Dummy && x.column_kinds[*b] == ColumnKind::Dummy => {
                    ColumnKind::Dummy
                }
                _ => ColumnKind::Continuous,
            })
            .collect();
        FeatureMatrix::new(values, self.output_names.clone(), kinds)
    }
}

/// Polynomial feature map: degree 0 is a constant column, degree 1 the
/// identity, higher degrees every allowed monomial up to that total degree
/// (dummies never raised to a power and only crossed at degree 2).
pub fn poly_expand(x: &FeatureMatrix, degree: usize) -> Result<FeatureMatrix> {
    PolyExpansion::new(x, degree)?.apply(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SgdConfig {
    pub penalty: Penalty,
    /// Penalty strength.
    pub alpha: f64,
    pub degree: usize,
    /// Initial learning rate; decays as `eta0 / (1 + eta0·alpha·t)`.
    pub eta0: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig { penalty: Penalty::L2, alpha: 0.1, degree: 0, eta0: 0.01, epochs: 50, batch_size: 32, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgdRegressor {
    pub config: SgdConfig,
    pub expansion: PolyExpansion,
    pub weights: Array1<f64>,
    pub intercept: f64,
    pub train_rmspe: f64,
}

/// Mean squared percentage error plus `alpha · R(w)`, with its gradient in
/// `(w, intercept)`. For L1 the gradient uses `sign(w)`.
pub fn mspe_objective(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    weights: ArrayView1<f64>,
    intercept: f64,
    penalty: Penalty,
    alpha: f64,
) -> (f64, Array1<f64>, f64) {
    let m = y.len() as f64;
    let pred = x.dot(&weights) + intercept;
    let rel = (&y - &pred) / &y;
    let loss = rel.mapv(|r| r * r).sum() / m + alpha * penalty.value(weights);
    // d/dŷ of ((y − ŷ)/y)² = −2 (y − ŷ)/y²
    let coef = -2.0 * &rel / &y / m;
    let mut grad_w = x.t().dot(&coef);
    match penalty {
        Penalty::L1 => grad_w += &(weights.mapv(f64::signum) * alpha),
        Penalty::L2 => grad_w += &(&weights * (2.0 * alpha)),
    }
    (loss, grad_w, coef.sum())
}

/// Constant minimizing `Σ((yᵢ − c)/yᵢ)²`.
pub fn rmspe_optimal_constant(y: &[f64]) -> f64 {
    let num: f64 = y.iter().map(|v| 1.0 / v).sum();
    let den: f64 = y.iter().map(|v| 1.0 / (v * v)).sum();
    num / den
}

/// Mini-batch proximal SGD on the mean squared percentage error.
pub fn sgd_fit(x: &FeatureMatrix, y: &[f64], config: &SgdConfig) -> Result<SgdRegressor> {
    if x.n_rows() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.n_rows(), found: y.len() });
    }
    if y.is_empty() {
        return Err(invalid("cannot fit on zero rows"));
    }
    if let Some(i) = y.iter().position(|&v| !(v > 0.0)) {
        return Err(invalid(format!("targets must be positive; row {i} is {}", y[i])));
    }
    if x.values.iter().any(|v| !v.is_finite()) {
        return Err(invalid("design matrix contains non-finite values"));
    }
    if config.epochs == 0 || config.batch_size == 0 || !(config.eta0 > 0.0) || !(config.alpha >= 0.0) {
        return Err(invalid("epochs, batch_size and eta0 must be positive and alpha non-negative"));
    }
    let expansion = PolyExpansion::new(x, config.degree)?;
    let features = expansion.apply(x)?.values;
    let targets = Array1::from(y.to_vec());
    let (m, d) = features.dim();

    let mut weights = Array1::<f64>::zeros(d);
    let mut intercept = rmspe_optimal_constant(y);
    let mut order: Vec<usize> = (0..m).collect();
    let mut rng = seeded(config.seed);
    let mut t = 0.0f64;
    for _epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let xb = features.select(Axis(0), batch);
            let yb = targets.select(Axis(0), batch);
            let eta = config.eta0 / (1.0 + config.eta0 * config.alpha * t);
            let (_, grad_w, grad_b) = mspe_objective(xb.view(), yb.view(), weights.view(), intercept, config.penalty, 0.0);
            weights.scaled_add(-eta, &grad_w);
            intercept -= eta * grad_b;
            config.penalty.prox(&mut weights, eta * config.alpha);
            t += 1.0;
        }
        let (loss, _, _) = mspe_objective(features.view(), targets.view(), weights.view(), intercept, config.penalty, config.alpha);
        if !loss.is_finite() || !intercept.is_finite() {
            return Err(Error::Diverged { learning_rate: config.eta0 });
        }
    }
    let pred = features.dot(&weights) + intercept;
    let train_rmspe = rmspe(y, pred.as_slice().expect("contiguous"))?;
    Ok(SgdRegressor { config: *config, expansion, weights, intercept, train_rmspe })
}

impl SgdRegressor {
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        let features = self.expansion.apply(x)?;
        Ok((features.values.dot(&self.weights) + self.intercept).to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MultiClassMode {
    OneVsRest,
    #[default]
    Multinomial,
}

impl std::str::FromStr for MultiClassMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ovr" | "one_vs_rest" => Ok(MultiClassMode::OneVsRest),
            "multinomial" => Ok(MultiClassMode::Multinomial),
            other => Err(invalid(format!("unknown multi-class mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticConfig {
    /// Inverse regularization strength.
    pub c: f64,
    pub penalty: Penalty,
    pub mode: MultiClassMode,
    pub learning_rate: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            c: 0.1,
            penalty: Penalty::L1,
            mode: MultiClassMode::Multinomial,
            learning_rate: 0.5,
            iterations: 500,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub config: LogisticConfig,
    /// One row per class.
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Row-wise softmax, shifted by the row max for stability.
pub fn softmax_rows(mut z: Array2<f64>) -> Array2<f64> {
    for mut row in z.rows_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    z
}

fn check_classification(x: &FeatureMatrix, y: &[usize]) -> Result<()> {
    if x.n_rows() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.n_rows(), found: y.len() });
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= NUM_CLASSES) {
        return Err(invalid(format!("class label {bad} outside 0..{NUM_CLASSES}")));
    }
    let first = y.first().ok_or_else(|| invalid("no training rows"))?;
    if y.iter().all(|c| c == first) {
        return Err(invalid("need at least two classes to fit a classifier"));
    }
    Ok(())
}

fn fit_binary(x: &Array2<f64>, target: &Array1<f64>, cfg: &LogisticConfig) -> (Array1<f64>, f64) {
    let m = x.nrows() as f64;
    let mut w = Array1::<f64>::zeros(x.ncols());
    let mut b = 0.0;
    let reg = cfg.learning_rate / (cfg.c * m);
    for _ in 0..cfg.iterations {
        let p = (x.dot(&w) + b).mapv(sigmoid);
        let err = &p - target;
        let gw = x.t().dot(&err) / m;
        w.scaled_add(-cfg.learning_rate, &gw);
        b -= cfg.learning_rate * err.sum() / m;
        cfg.penalty.prox(&mut w, prox_strength(cfg.penalty, reg));
    }
    (w, b)
}

// L2 uses ½‖w‖², so its proximal scale is half of the ‖w‖² prox.
fn prox_strength(penalty: Penalty, reg: f64) -> f64 {
    match penalty {
        Penalty::L1 => reg,
        Penalty::L2 => reg / 2.0,
    }
}

/// Full-batch proximal gradient descent on `Σ cross-entropy + (1/C)·R(W)`.
pub fn logistic_fit(x: &FeatureMatrix, y: &[usize], config: &LogisticConfig) -> Result<LogisticModel> {
    check_classification(x, y)?;
    if !(config.c > 0.0) {
        return Err(invalid(format!("C must be positive, got {}", config.c)));
    }
    if config.iterations == 0 || !(config.learning_rate > 0.0) {
        return Err(invalid("iterations and learning_rate must be positive"));
    }
    let (m, d) = x.values.dim();
    let mut onehot = Array2::<f64>::zeros((m, NUM_CLASSES));
    for (i, &c) in y.iter().enumerate() {
        onehot[[i, c]] = 1.0;
    }
    let (weights, biases) = match config.mode {
        MultiClassMode::OneVsRest => {
            let fits: Vec<(Array1<f64>, f64)> = (0..NUM_CLASSES)
                .into_par_iter()
                .map(|k| fit_binary(&x.values, &onehot.column(k).to_owned(), config))
                .collect();
            let mut w = Array2::zeros((NUM_CLASSES, d));
            let mut b = Array1::zeros(NUM_CLASSES);
            for (k, (wk, bk)) in fits.into_iter().enumerate() {
                w.row_mut(k).assign(&wk);
                b[k] = bk;
            }
            (w, b)
        }
        MultiClassMode::Multinomial => {
            let mut w = Array2::<f64>::zeros((NUM_CLASSES, d));
            let mut b = Array1::<f64>::zeros(NUM_CLASSES);
            let lr = config.learning_rate;
            let reg = prox_strength(config.penalty, lr / (config.c * m as f64));
            for _ in 0..config.iterations {
                let p = softmax_rows(x.values.dot(&w.t()) + &b);
                let err = p - &onehot;
                let gw = err.t().dot(&x.values) / m as f64;
                w.scaled_add(-lr, &gw);
                b.scaled_add(-lr, &(err.sum_axis(Axis(0)) / m as f64));
                for mut row in w.rows_mut() {
                    let mut r = row.to_owned();
                    config.penalty.prox(&mut r, reg);
                    row.assign(&r);
                }
            }
            (w, b)
        }
    };
    if weights.iter().chain(biases.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Diverged { learning_rate: config.learning_rate });
    }
    Ok(LogisticModel { config: *config, weights, biases })
}

impl LogisticModel {
    pub fn decision(&self, x: &FeatureMatrix) -> Result<Array2<f64>> {
        if x.n_cols() != self.weights.ncols() {
            return Err(Error::DimensionMismatch { expected: self.weights.ncols(), found: x.n_cols() });
        }
        Ok(x.values.dot(&self.weights.t()) + &self.biases)
    }

    /// `M × 5` class probabilities; OvR scores are sigmoid outputs divided by
    /// their row sum.
    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<Array2<f64>> {
        let z = self.decision(x)?;
        Ok(match self.config.mode {
            MultiClassMode::Multinomial => softmax_rows(z),
            MultiClassMode::OneVsRest => {
                let mut s = z.mapv(sigmoid);
                for mut row in s.rows_mut() {
                    let sum = row.sum();
                    if sum > 0.0 {
                        row.mapv_inplace(|v| v / sum);
                    } else {
                        row.fill(1.0 / NUM_CLASSES as f64);
                    }
                }
                s
            }
        })
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<usize>> {
        Ok(argmax_rows(&self.predict_proba(x)?))
    }
}

/// Column of the row maximum; ties go to the lowest index.
pub fn argmax_rows(p: &Array2<f64>) -> Vec<usize> {
    p.rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (j, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}
