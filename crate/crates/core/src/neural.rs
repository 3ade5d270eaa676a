//! A small multilayer perceptron with sigmoid hidden layers and a linear
//! output, trained by mini-batch gradient descent with momentum.
//!
//! Batches are stored one sample per column so every layer is a single
//! matrix product.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Sigmoid,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Sigmoid => sigmoid(z),
            Activation::Identity => z,
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layer_sizes: Vec<usize>,
    weights: Vec<DMatrix<f64>>,
    biases: Vec<DVector<f64>>,
    seed: Option<u64>,
}

/// Per-layer activations of one forward pass; `activations[0]` is the input
/// and the last entry is the output.
#[derive(Debug, Clone)]
pub struct Forward {
    pub activations: Vec<DVector<f64>>,
}

impl Forward {
    pub fn output(&self) -> &DVector<f64> {
        self.activations
            .last()
            .expect("forward pass has an output layer")
    }
}

/// Gradients with the same shapes as the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            weights: net
                .weights
                .iter()
                .map(|w| DMatrix::zeros(w.nrows(), w.ncols()))
                .collect(),
            biases: net.biases.iter().map(|b| DVector::zeros(b.len())).collect(),
        }
    }

    /// Weights (column-major per layer) followed by the layer's biases.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w.as_slice());
            out.extend_from_slice(b.as_slice());
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.flatten().iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Supervised data, one sample per column.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    pub inputs: DMatrix<f64>,
    pub targets: DMatrix<f64>,
}

impl LabeledSet {
    pub fn new(inputs: DMatrix<f64>, targets: DMatrix<f64>) -> Result<Self> {
        if inputs.ncols() != targets.ncols() {
            return Err(Error::dim(format!(
                "{} input samples vs {} targets",
                inputs.ncols(),
                targets.ncols()
            )));
        }
        if inputs.iter().chain(targets.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "non-finite value in labeled set".into(),
            ));
        }
        Ok(Self { inputs, targets })
    }

    /// Builds a set from per-sample rows.
    pub fn from_rows(inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::dim(format!(
                "{} input rows vs {} target rows",
                inputs.len(),
                targets.len()
            )));
        }
        let n_in = inputs.first().map_or(0, Vec::len);
        let n_out = targets.first().map_or(0, Vec::len);
        if inputs.iter().any(|r| r.len() != n_in) || targets.iter().any(|r| r.len() != n_out) {
            return Err(Error::dim("ragged rows in labeled set"));
        }
        let x = DMatrix::from_iterator(n_in, inputs.len(), inputs.iter().flatten().copied());
        let y = DMatrix::from_iterator(n_out, targets.len(), targets.iter().flatten().copied());
        Self::new(x, y)
    }

    pub fn len(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_inputs(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn n_outputs(&self) -> usize {
        self.targets.nrows()
    }

    pub fn select(&self, indices: &[usize]) -> LabeledSet {
        LabeledSet {
            inputs: self.inputs.select_columns(indices),
            targets: self.targets.select_columns(indices),
        }
    }

    /// Appends the samples of `other`.
    pub fn extend(&mut self, other: &LabeledSet) -> Result<()> {
        if other.n_inputs() != self.n_inputs() || other.n_outputs() != self.n_outputs() {
            return Err(Error::dim("labeled sets have different widths"));
        }
        let m = self.len();
        let k = other.len();
        let inputs = std::mem::replace(&mut self.inputs, DMatrix::zeros(0, 0));
        let targets = std::mem::replace(&mut self.targets, DMatrix::zeros(0, 0));
        let mut inputs = inputs.resize_horizontally(m + k, 0.0);
        let mut targets = targets.resize_horizontally(m + k, 0.0);
        inputs.columns_mut(m, k).copy_from(&other.inputs);
        targets.columns_mut(m, k).copy_from(&other.targets);
        self.inputs = inputs;
        self.targets = targets;
        Ok(())
    }
}

impl Mlp {
    /// Glorot-uniform weights and zero biases.
    pub fn new<R: Rng + ?Sized>(layer_sizes: &[usize], rng: &mut R) -> Result<Self> {
        check_sizes(layer_sizes)?;
        let mut weights = Vec::with_capacity(layer_sizes.len() - 1);
        let mut biases = Vec::with_capacity(layer_sizes.len() - 1);
        for pair in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push(DMatrix::from_fn(fan_out, fan_in, |_, _| {
                rng.random_range(-limit..=limit)
            }));
            biases.push(DVector::zeros(fan_out));
        }
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
            seed: None,
        })
    }

    pub fn seeded(layer_sizes: &[usize], seed: u64) -> Result<Self> {
        let mut net = Self::new(layer_sizes, &mut rng::stream(seed, &[rng::tag::INIT]))?;
        net.seed = Some(seed);
        Ok(net)
    }

    pub fn zeros(layer_sizes: &[usize]) -> Result<Self> {
        check_sizes(layer_sizes)?;
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            weights: layer_sizes
                .windows(2)
                .map(|p| DMatrix::zeros(p[1], p[0]))
                .collect(),
            biases: layer_sizes[1..]
                .iter()
                .map(|&n| DVector::zeros(n))
                .collect(),
            seed: None,
        })
    }

    pub fn from_parameters(weights: Vec<DMatrix<f64>>, biases: Vec<DVector<f64>>) -> Result<Self> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(Error::dim("need one bias vector per weight matrix"));
        }
        let mut sizes = vec![weights[0].ncols()];
        for (i, (w, b)) in weights.iter().zip(&biases).enumerate() {
            if w.ncols() != *sizes.last().unwrap() || b.len() != w.nrows() {
                return Err(Error::dim(format!("layer {i} shapes do not chain")));
            }
            sizes.push(w.nrows());
        }
        check_sizes(&sizes)?;
        if weights
            .iter()
            .flat_map(|w| w.iter())
            .chain(biases.iter().flat_map(|b| b.iter()))
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidArgument(
                "non-finite network parameter".into(),
            ));
        }
        Ok(Self {
            layer_sizes: sizes,
            weights,
            biases,
            seed: None,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn weights(&self) -> &[DMatrix<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[DVector<f64>] {
        &self.biases
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn n_inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn n_outputs(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    /// Number of weights (biases excluded).
    pub fn weight_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum()
    }

    pub fn parameter_count(&self) -> usize {
        self.weight_count() + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    /// Multiply-accumulates of one forward pass.
    pub fn forward_macs(&self) -> usize {
        self.weight_count()
    }

    fn activation(&self, layer: usize) -> Activation {
        if layer + 1 == self.n_layers() {
            Activation::Identity
        } else {
            Activation::Sigmoid
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Forward> {
        if x.len() != self.n_inputs() {
            return Err(Error::dim(format!(
                "input length {} vs network input {}",
                x.len(),
                self.n_inputs()
            )));
        }
        let mut activations = Vec::with_capacity(self.n_layers() + 1);
        activations.push(DVector::from_column_slice(x));
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let act = self.activation(l);
            let mut z = w * activations.last().unwrap() + b;
            z.apply(|v| *v = act.apply(*v));
            activations.push(z);
        }
        Ok(Forward { activations })
    }

    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.output().as_slice().to_vec())
    }

    /// Outputs for a batch with one sample per column.
    pub fn predict_batch(&self, inputs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if inputs.nrows() != self.n_inputs() {
            return Err(Error::dim(format!(
                "batch rows {} vs network input {}",
                inputs.nrows(),
                self.n_inputs()
            )));
        }
        let mut a = inputs.clone();
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            a = self.affine(w, b, &a);
            let act = self.activation(l);
            if act != Activation::Identity {
                a.apply(|v| *v = act.apply(*v));
            }
        }
        Ok(a)
    }

    fn affine(&self, w: &DMatrix<f64>, b: &DVector<f64>, a: &DMatrix<f64>) -> DMatrix<f64> {
        let mut z = w * a;
        for mut col in z.column_iter_mut() {
            col += b;
        }
        z
    }

    /// Batch-mean squared error `(1/B) Σ_i ||net(x_i) − y_i||²`.
    pub fn mse(&self, data: &LabeledSet) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::Empty("labeled set"));
        }
        let out = self.predict_batch(&data.inputs)?;
        check_targets(self, &data.targets)?;
        Ok((out - &data.targets).norm_squared() / data.len() as f64)
    }

    /// Exact gradient of the batch-mean squared error. Returns the loss too.
    pub fn backprop(
        &self,
        inputs: &DMatrix<f64>,
        targets: &DMatrix<f64>,
    ) -> Result<(f64, Gradients)> {
        let m = inputs.ncols();
        if m == 0 {
            return Err(Error::Empty("batch"));
        }
        if inputs.nrows() != self.n_inputs() || targets.ncols() != m {
            return Err(Error::dim("batch shape does not match network"));
        }
        check_targets(self, targets)?;
        let nl = self.n_layers();
        let mut acts: Vec<DMatrix<f64>> = Vec::with_capacity(nl + 1);
        acts.push(inputs.clone());
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = self.affine(w, b, &acts[l]);
            if self.activation(l) == Activation::Sigmoid {
                z.apply(|v| *v = sigmoid(*v));
            }
            acts.push(z);
        }
        let resid = &acts[nl] - targets;
        let loss = resid.norm_squared() / m as f64;
        let mut delta = resid * (2.0 / m as f64);
        let mut grads = Gradients {
            weights: Vec::with_capacity(nl),
            biases: Vec::with_capacity(nl),
        };
        for l in (0..nl).rev() {
            grads.weights.push(&delta * acts[l].transpose());
            grads.biases.push(delta.column_sum());
            if l > 0 {
                let mut back = self.weights[l].transpose() * &delta;
                back.zip_apply(&acts[l], |d, a| *d *= a * (1.0 - a));
                delta = back;
            }
        }
        grads.weights.reverse();
        grads.biases.reverse();
        Ok((loss, grads))
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights
            .iter_mut()
            .zip(self.biases.iter_mut())
            .flat_map(|(w, b)| w.iter_mut().chain(b.iter_mut()))
    }

    fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w.as_slice());
            out.extend_from_slice(b.as_slice());
        }
        out
    }

    fn set_params_flat(&mut self, values: &[f64]) {
        for (p, v) in self.params_mut().zip(values) {
            *p = *v;
        }
    }

    pub fn to_document(&self) -> MlpDocument {
        MlpDocument {
            layer_sizes: self.layer_sizes.clone(),
            weights: self
                .weights
                .iter()
                .map(|w| {
                    (0..w.nrows())
                        .flat_map(|r| (0..w.ncols()).map(move |c| (r, c)))
                        .map(|(r, c)| w[(r, c)])
                        .collect()
                })
                .collect(),
            biases: self.biases.iter().map(|b| b.as_slice().to_vec()).collect(),
            hidden_activation: Activation::Sigmoid,
            output_activation: Activation::Identity,
            seed: self.seed,
        }
    }

    pub fn from_document(doc: MlpDocument) -> Result<Self> {
        if doc.hidden_activation != Activation::Sigmoid
            || doc.output_activation != Activation::Identity
        {
            return Err(Error::InvalidArgument(
                "only sigmoid hidden layers with an identity output are supported".into(),
            ));
        }
        check_sizes(&doc.layer_sizes)?;
        let nl = doc.layer_sizes.len() - 1;
        if doc.weights.len() != nl || doc.biases.len() != nl {
            return Err(Error::dim("layer count does not match stored parameters"));
        }
        let mut weights = Vec::with_capacity(nl);
        for (l, w) in doc.weights.iter().enumerate() {
            let (rows, cols) = (doc.layer_sizes[l + 1], doc.layer_sizes[l]);
            if w.len() != rows * cols {
                return Err(Error::dim(format!("layer {l} has {} weights", w.len())));
            }
            weights.push(DMatrix::from_row_slice(rows, cols, w));
        }
        let biases = doc
            .biases
            .iter()
            .map(|b| DVector::from_column_slice(b))
            .collect();
        let mut net = Self::from_parameters(weights, biases)?;
        if net.layer_sizes != doc.layer_sizes {
            return Err(Error::dim("stored layer sizes disagree with parameters"));
        }
        net.seed = doc.seed;
        Ok(net)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_document())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_document(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "a network needs at least 2 layers, got {}",
            sizes.len()
        )));
    }
    if sizes.contains(&0) {
        return Err(Error::InvalidArgument(
            "layer sizes must be positive".into(),
        ));
    }
    Ok(())
}

fn check_targets(net: &Mlp, targets: &DMatrix<f64>) -> Result<()> {
    if targets.nrows() != net.n_outputs() {
        return Err(Error::dim(format!(
            "target width {} vs network output {}",
            targets.nrows(),
            net.n_outputs()
        )));
    }
    Ok(())
}

/// JSON form of a network; weights are stored row-major per layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpDocument {
    pub layer_sizes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            momentum: 0.9,
            batch_size: 128,
            max_epochs: 200,
            patience: 20,
            validation_fraction: 0.1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::config(
                "learning_rate",
                "must be a finite non-negative number",
            ));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::config("momentum", "must lie in [0, 1)"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(Error::config("validation_fraction", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_mse: f64,
    pub validation_mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Entry 0 is the untrained network.
    pub history: Vec<EpochStats>,
    pub best_epoch: usize,
    pub best_validation_mse: f64,
    pub n_train: usize,
    pub n_validation: usize,
}

/// Mini-batch gradient descent with momentum:
/// `a ← η·a + γ·∇`, `θ ← θ − a`.
///
/// A fraction of the data is held out for validation. The network is left
/// at the parameters with the lowest validation error; training stops after
/// `patience` epochs without improvement. With no validation split the
/// training error is used instead.
pub fn train(net: &mut Mlp, data: &LabeledSet, cfg: &TrainConfig) -> Result<TrainReport> {
    cfg.validate()?;
    if data.len() < cfg.batch_size {
        return Err(Error::InvalidArgument(format!(
            "{} samples is fewer than the batch size {}",
            data.len(),
            cfg.batch_size
        )));
    }
    if data.n_inputs() != net.n_inputs() || data.n_outputs() != net.n_outputs() {
        return Err(Error::dim("labeled set does not match network shape"));
    }
    let mut rng = rng::stream(cfg.seed, &[rng::tag::SHUFFLE]);
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut rng);
    let n_val = ((data.len() as f64) * cfg.validation_fraction).round() as usize;
    let n_val = n_val.min(data.len() - cfg.batch_size);
    let validation = (n_val > 0).then(|| data.select(&order[..n_val]));
    let mut train_idx = order[n_val..].to_vec();
    let train_set = data.select(&train_idx);
    for (i, v) in train_idx.iter_mut().enumerate() {
        *v = i;
    }

    let score = |net: &Mlp| -> Result<(f64, f64)> {
        let t = net.mse(&train_set)?;
        let v = match &validation {
            Some(val) => net.mse(val)?,
            None => t,
        };
        Ok((t, v))
    };

    let (t0, v0) = score(net)?;
    let mut history = vec![EpochStats {
        epoch: 0,
        train_mse: t0,
        validation_mse: v0,
    }];
    let mut best = (0usize, v0, net.params_flat());
    let mut velocity = vec![0.0; net.parameter_count()];
    let mut since_best = 0usize;

    let b = cfg.batch_size;
    let mut xb = DMatrix::zeros(net.n_inputs(), b);
    let mut yb = DMatrix::zeros(net.n_outputs(), b);
    for epoch in 1..=cfg.max_epochs {
        train_idx.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in train_idx.chunks(b) {
            let (x, y) = if chunk.len() == b {
                for (j, &i) in chunk.iter().enumerate() {
                    xb.set_column(j, &train_set.inputs.column(i));
                    yb.set_column(j, &train_set.targets.column(i));
                }
                (&xb, &yb)
            } else {
                xb = train_set.inputs.select_columns(chunk);
                yb = train_set.targets.select_columns(chunk);
                (&xb, &yb)
            };
            let (loss, grads) = net.backprop(x, y)?;
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            epoch_loss += loss * chunk.len() as f64;
            let g = grads.flatten();
            for ((p, a), g) in net.params_mut().zip(velocity.iter_mut()).zip(&g) {
                *a = cfg.momentum * *a + cfg.learning_rate * g;
                *p -= *a;
            }
        }
        if xb.ncols() != b {
            xb = DMatrix::zeros(net.n_inputs(), b);
            yb = DMatrix::zeros(net.n_outputs(), b);
        }
        if !(epoch_loss.is_finite()) {
            return Err(Error::Diverged { epoch });
        }
        let (t, v) = score(net)?;
        if !t.is_finite() || !v.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        history.push(EpochStats {
            epoch,
            train_mse: t,
            validation_mse: v,
        });
        if v < best.1 {
            best = (epoch, v, net.params_flat());
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
    }
    net.set_params_flat(&best.2);
    Ok(TrainReport {
        history,
        best_epoch: best.0,
        best_validation_mse: best.1,
        n_train: train_set.len(),
        n_validation: n_val,
    })
}

/// Five-point finite-difference gradient of the single-sample squared error:
/// `(−f(θ+2h) + 8f(θ+h) − 8f(θ−h) + f(θ−2h)) / 12h`.
pub fn numerical_gradients(net: &Mlp, x: &[f64], y: &[f64], step: f64) -> Result<Gradients> {
    let sample = LabeledSet {
        inputs: DMatrix::from_column_slice(x.len(), 1, x),
        targets: DMatrix::from_column_slice(y.len(), 1, y),
    };
    let base = net.params_flat();
    let mut probe = net.clone();
    let mut flat = vec![0.0; base.len()];
    let mut params = base.clone();
    let mut loss_at = |i: usize, offset: f64, params: &mut Vec<f64>| -> Result<f64> {
        params[i] = base[i] + offset;
        probe.set_params_flat(params);
        probe.mse(&sample)
    };
    for i in 0..base.len() {
        let f2 = loss_at(i, 2.0 * step, &mut params)?;
        let f1 = loss_at(i, step, &mut params)?;
        let b1 = loss_at(i, -step, &mut params)?;
        let b2 = loss_at(i, -2.0 * step, &mut params)?;
        params[i] = base[i];
        flat[i] = (8.0 * (f1 - b1) - (f2 - b2)) / (12.0 * step);
    }
    let mut out = Gradients::zeros_like(net);
    let mut it = flat.into_iter();
    for (w, b) in out.weights.iter_mut().zip(out.biases.iter_mut()) {
        for v in w.iter_mut().chain(b.iter_mut()) {
            *v = it.next().unwrap();
        }
    }
    Ok(out)
}

/// Largest entrywise relative difference `|a − b| / max(|a|, |b|, 1e-3)`.
pub fn compare_gradients(a: &Gradients, b: &Gradients) -> f64 {
    a.flatten()
        .iter()
        .zip(b.flatten())
        .map(|(&x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1e-3))
        .fold(0.0, f64::max)
}

/// Maximum relative error between backprop and five-point differences
/// (step 1e-4).
pub fn grad_check(net: &Mlp, x: &[f64], y: &[f64]) -> Result<f64> {
    let xs = DMatrix::from_column_slice(x.len(), 1, x);
    let ys = DMatrix::from_column_slice(y.len(), 1, y);
    let (_, analytic) = net.backprop(&xs, &ys)?;
    let numeric = numerical_gradients(net, x, y, 1e-4)?;
    Ok(compare_gradients(&analytic, &numeric))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Aoa,
    As,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Aoa => "aoa",
            Task::As => "as",
        }
    }
}

const AS_HIDDEN_4: [&[usize]; 8] = [
    &[32, 32, 32],
    &[40, 40, 40],
    &[20, 20, 10],
    &[40, 20, 10],
    &[32, 32, 16],
    &[40, 20, 20],
    &[40, 20, 10],
    &[40, 20, 10],
];

const AS_HIDDEN_8: [&[usize]; 8] = [
    &[40, 20, 20],
    &[40, 20, 20],
    &[20, 20, 10],
    &[40, 40, 20],
    &[32, 16, 16],
    &[40, 20, 20],
    &[40, 40, 20],
    &[16, 16],
];

/// Beams kept for spread estimation.
pub fn as_beam_count(n_sec: usize) -> Result<usize> {
    match n_sec {
        8 => Ok(5),
        4 => Ok(4),
        _ => Err(Error::config("beams_per_sector", "N_sec must be 4 or 8")),
    }
}

/// Full layer sizes `[n_in, hidden.., 1]` for each of the eight sectors.
pub fn architectures(n_sec: usize, task: Task) -> Result<Vec<Vec<usize>>> {
    let n2 = as_beam_count(n_sec)?;
    let (n_in, hidden): (usize, [&[usize]; 8]) = match task {
        Task::Aoa => (n_sec, [&[16, 16]; 8]),
        Task::As if n_sec == 4 => (2 * n2, AS_HIDDEN_4),
        Task::As => (2 * n2, AS_HIDDEN_8),
    };
    Ok(hidden
        .iter()
        .map(|h| {
            let mut v = vec![n_in];
            v.extend_from_slice(h);
            v.push(1);
            v
        })
        .collect())
}
