//! Feed-forward classifier: ReLU hidden layers (64/16/16 by default),
//! softmax output over the five city classes, inverted dropout, trained by
//! mini-batch SGD on categorical cross-entropy.

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::data_model::{FeatureMatrix, NUM_CLASSES};
use crate::error::{invalid, Error, Result};
use crate::linear_models::{argmax_rows, softmax_rows};
use crate::rng::{derive_seed, seeded};

pub const DEFAULT_HIDDEN: [usize; 3] = [64, 16, 16];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Dropout rate after each hidden layer.
    pub dropout: Vec<f64>,
    /// Stop after this many epochs without a validation-accuracy gain.
    pub patience: Option<usize>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden: DEFAULT_HIDDEN.to_vec(),
            epochs: 1000,
            batch_size: 32,
            learning_rate: 0.01,
            dropout: vec![0.0; DEFAULT_HIDDEN.len()],
            patience: None,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Regularized run: dropout on every hidden layer, at most 200 epochs,
    /// early stopping after 20 flat epochs.
    pub fn tuned(seed: u64) -> Self {
        TrainConfig { epochs: 200, dropout: vec![0.2; DEFAULT_HIDDEN.len()], patience: Some(20), seed, ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(invalid("epochs must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(invalid("batch_size must be at least 1"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(invalid("learning_rate must be positive"));
        }
        if self.dropout.len() != self.hidden.len() {
            return Err(invalid(format!(
                "expected {} dropout rates, got {}",
                self.hidden.len(),
                self.dropout.len()
            )));
        }
        if self.dropout.iter().any(|p| !(0.0..1.0).contains(p)) {
            return Err(invalid("dropout rates must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    /// `[d, hidden..., 5]`.
    pub layer_sizes: Vec<usize>,
    /// Layer `l` maps `layer_sizes[l]` to `layer_sizes[l + 1]`; shape `out × in`.
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub dropout: Vec<f64>,
}

/// Gradients with the same layout as the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

struct Trace {
    /// Layer inputs, `activations[0]` is the batch itself.
    activations: Vec<Array2<f64>>,
    preactivations: Vec<Array2<f64>>,
    /// Scaled keep-masks per hidden layer (training only).
    masks: Vec<Option<Array2<f64>>>,
    probs: Array2<f64>,
}

impl MlpModel {
    /// Fan-in scaled uniform initialization, zero biases.
    pub fn init(n_features: usize, hidden: &[usize], dropout: &[f64], seed: u64) -> Self {
        let mut layer_sizes = vec![n_features];
        layer_sizes.extend_from_slice(hidden);
        layer_sizes.push(NUM_CLASSES);
        let mut rng = seeded(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / fan_in.max(1) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit).expect("finite bounds");
            weights.push(Array2::from_shape_fn((fan_out, fan_in), |_| dist.sample(&mut rng)));
            biases.push(Array1::zeros(fan_out));
        }
        MlpModel { layer_sizes, weights, biases, dropout: dropout.to_vec() }
    }

    pub fn n_features(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn n_parameters(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>() + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    fn check(&self, x: &Array2<f64>) -> Result<()> {
        if x.ncols() != self.n_features() {
            return Err(Error::DimensionMismatch { expected: self.n_features(), found: x.ncols() });
        }
        Ok(())
    }

    fn run<R: Rng>(&self, x: &Array2<f64>, mut dropout_rng: Option<&mut R>) -> Trace {
        let n_layers = self.weights.len();
        let mut activations = vec![x.clone()];
        let mut preactivations = Vec::with_capacity(n_layers);
        let mut masks = Vec::with_capacity(n_layers - 1);
        for l in 0..n_layers {
            let z = activations[l].dot(&self.weights[l].t()) + &self.biases[l];
            if l + 1 == n_layers {
                let probs = softmax_rows(z.clone());
                preactivations.push(z);
                return Trace { activations, preactivations, masks, probs };
            }
            let mut a = z.mapv(|v| v.max(0.0));
            let p = self.dropout.get(l).copied().unwrap_or(0.0);
            let mask = match dropout_rng.as_deref_mut() {
                Some(rng) if p > 0.0 => {
                    let keep = 1.0 / (1.0 - p);
                    let m = Array2::from_shape_fn(a.dim(), |_| if rng.random::<f64>() < p { 0.0 } else { keep });
                    a *= &m;
                    Some(m)
                }
                _ => None,
            };
            masks.push(mask);
            preactivations.push(z);
            activations.push(a);
        }
        unreachable!("network has an output layer")
    }

    /// Class probabilities; `training` enables dropout masks drawn from `rng`.
    pub fn forward_with<R: Rng>(&self, x: &FeatureMatrix, rng: Option<&mut R>) -> Result<Array2<f64>> {
        self.check(&x.values)?;
        Ok(self.run(&x.values, rng).probs)
    }

    /// Inference-mode forward pass (no dropout, no rescaling).
    pub fn forward(&self, x: &FeatureMatrix) -> Result<Array2<f64>> {
        self.forward_with::<rand_chacha::ChaCha8Rng>(x, None)
    }

    /// Pre-activations of every layer; dropout applied when `rng` is given.
    pub fn preactivations<R: Rng>(&self, x: &Array2<f64>, rng: Option<&mut R>) -> Result<Vec<Array2<f64>>> {
        self.check(x)?;
        Ok(self.run(x, rng).preactivations)
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<usize>> {
        Ok(argmax_rows(&self.forward(x)?))
    }

    fn backward(&self, trace: &Trace, y: &[usize]) -> (f64, Gradients) {
        let n = y.len() as f64;
        let n_layers = self.weights.len();
        let mut loss = 0.0;
        let mut delta = trace.probs.clone();
        for (i, &c) in y.iter().enumerate() {
            loss -= trace.probs[[i, c]].max(1e-300).ln();
            delta[[i, c]] -= 1.0;
        }
        delta /= n;
        let mut gw = vec![Array2::zeros((0, 0)); n_layers];
        let mut gb = vec![Array1::zeros(0); n_layers];
        for l in (0..n_layers).rev() {
            gw[l] = delta.t().dot(&trace.activations[l]);
            gb[l] = delta.sum_axis(Axis(0));
            if l > 0 {
                let mut back = delta.dot(&self.weights[l]);
                back.zip_mut_with(&trace.preactivations[l - 1], |g, &z| {
                    if z <= 0.0 {
                        *g = 0.0;
                    }
                });
                if let Some(mask) = &trace.masks[l - 1] {
                    back *= mask;
                }
                delta = back;
            }
        }
        (loss / n, Gradients { weights: gw, biases: gb })
    }

    /// Mean cross-entropy and its exact gradient, without dropout.
    pub fn loss_and_gradients(&self, x: &FeatureMatrix, y: &[usize]) -> Result<(f64, Gradients)> {
        self.check(&x.values)?;
        let trace = self.run::<rand_chacha::ChaCha8Rng>(&x.values, None);
        Ok(self.backward(&trace, y))
    }

    pub fn loss(&self, x: &FeatureMatrix, y: &[usize]) -> Result<f64> {
        let p = self.forward(x)?;
        Ok(-y.iter().enumerate().map(|(i, &c)| p[[i, c]].max(1e-300).ln()).sum::<f64>() / y.len() as f64)
    }

    fn step(&mut self, grads: &Gradients, lr: f64) {
        for (w, g) in self.weights.iter_mut().zip(&grads.weights) {
            w.scaled_add(-lr, g);
        }
        for (b, g) in self.biases.iter_mut().zip(&grads.biases) {
            b.scaled_add(-lr, g);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub validation_accuracy: Option<f64>,
}

/// Per-epoch training curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    pub stopped_early: bool,
}

impl TrainHistory {
    /// `epoch,train_loss,train_accuracy,validation_accuracy` rows.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["epoch", "train_loss", "train_accuracy", "validation_accuracy"])?;
        for e in &self.epochs {
            w.write_record([
                e.epoch.to_string(),
                e.train_loss.to_string(),
                e.train_accuracy.to_string(),
                e.validation_accuracy.map(|v| v.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn accuracy_of(pred: &[usize], y: &[usize]) -> f64 {
    pred.iter().zip(y).filter(|(a, b)| a == b).count() as f64 / y.len().max(1) as f64
}

/// Trains without a validation set.
pub fn mlp_train(x: &FeatureMatrix, y: &[usize], config: &TrainConfig) -> Result<(MlpModel, TrainHistory)> {
    mlp_train_with_validation(x, y, None, config)
}

/// Mini-batch SGD; records train and (optionally) validation accuracy each
/// epoch. With `patience` and a validation set, stops once validation
/// accuracy has not improved for that many epochs and keeps the best model.
pub fn mlp_train_with_validation(
    x: &FeatureMatrix,
    y: &[usize],
    validation: Option<(&FeatureMatrix, &[usize])>,
    config: &TrainConfig,
) -> Result<(MlpModel, TrainHistory)> {
    config.validate()?;
    if x.n_rows() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.n_rows(), found: y.len() });
    }
    if y.is_empty() {
        return Err(invalid("cannot train on zero rows"));
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= NUM_CLASSES) {
        return Err(invalid(format!("class label {bad} outside 0..{NUM_CLASSES}")));
    }
    let mut model = MlpModel::init(x.n_cols(), &config.hidden, &config.dropout, config.seed);
    let mut shuffle_rng = seeded(derive_seed(config.seed, 1));
    let mut dropout_rng = seeded(derive_seed(config.seed, 2));
    let mut order: Vec<usize> = (0..y.len()).collect();
    let mut history = TrainHistory::default();
    let mut best: Option<(f64, MlpModel)> = None;
    let mut since_best = 0;
    for epoch in 1..=config.epochs {
        order.shuffle(&mut shuffle_rng);
        for batch in order.chunks(config.batch_size) {
            let xb = x.values.select(Axis(0), batch);
            let yb: Vec<usize> = batch.iter().map(|&i| y[i]).collect();
            let trace = model.run(&xb, Some(&mut dropout_rng));
            let (_, grads) = model.backward(&trace, &yb);
            model.step(&grads, config.learning_rate);
        }
        let probs = model.forward(x)?;
        let train_loss = -y.iter().enumerate().map(|(i, &c)| probs[[i, c]].max(1e-300).ln()).sum::<f64>() / y.len() as f64;
        if !train_loss.is_finite() || model.weights.iter().any(|w| w.iter().any(|v| !v.is_finite())) {
            return Err(Error::Diverged { learning_rate: config.learning_rate });
        }
        let train_accuracy = accuracy_of(&argmax_rows(&probs), y);
        let validation_accuracy = match validation {
            Some((xv, yv)) => Some(accuracy_of(&model.predict(xv)?, yv)),
            None => None,
        };
        history.epochs.push(EpochRecord { epoch, train_loss, train_accuracy, validation_accuracy });
        if let (Some(patience), Some(acc)) = (config.patience, validation_accuracy) {
            if best.as_ref().is_none_or(|(b, _)| acc > *b) {
                best = Some((acc, model.clone()));
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= patience {
                    history.stopped_early = true;
                    break;
                }
            }
        }
    }
    if let Some((_, best_model)) = best {
        model = best_model;
    }
    Ok((model, history))
}
