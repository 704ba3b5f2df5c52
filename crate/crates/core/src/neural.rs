//! Fully connected feedforward networks trained by minibatch gradient descent.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Rectifier,
    Logistic,
    Tanh,
    Softmax,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    Mse,
    CrossEntropy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkSpec {
    pub layer_sizes: Vec<usize>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    pub loss: Loss,
    pub seed: u64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch: usize,
    /// Rescale each minibatch gradient to at most this global L2 norm.
    pub clip_norm: Option<f64>,
    /// Hidden weight layers (0-based) that use the identity instead of `hidden_activation`.
    pub linear_layers: Vec<usize>,
}

impl Default for NetworkSpec {
    fn default() -> Self {
        NetworkSpec {
            layer_sizes: vec![2, 8, 2],
            hidden_activation: Activation::Rectifier,
            output_activation: Activation::Softmax,
            loss: Loss::CrossEntropy,
            seed: 0,
            learning_rate: 0.01,
            epochs: 200,
            batch: 32,
            clip_norm: None,
            linear_layers: Vec::new(),
        }
    }
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 2 || self.layer_sizes.contains(&0) {
            return Err(Error::invalid("a network needs at least 2 non-empty layers"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::invalid("learning rate must be > 0"));
        }
        if self.batch == 0 {
            return Err(Error::invalid("batch size must be >= 1"));
        }
        if self.linear_layers.iter().any(|&l| l + 2 >= self.layer_sizes.len()) {
            return Err(Error::invalid("linear_layers may only name hidden layers"));
        }
        if self.hidden_activation == Activation::Softmax {
            return Err(Error::invalid("softmax is only supported on the output layer"));
        }
        if self.output_activation == Activation::Rectifier || self.output_activation == Activation::Tanh {
            return Err(Error::invalid("output activation must be logistic, softmax or identity"));
        }
        if self.loss == Loss::CrossEntropy && self.output_activation == Activation::Identity {
            return Err(Error::invalid("cross-entropy needs a logistic or softmax output"));
        }
        Ok(())
    }
}

/// Base-64 encoding of little-endian f64 arrays for JSON.
pub mod b64 {
    use base64::{engine::general_purpose::STANDARD, Engine};
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn encode(v: &[f64]) -> String {
        let bytes: Vec<u8> = v.iter().flat_map(|x| x.to_le_bytes()).collect();
        STANDARD.encode(bytes)
    }

    pub fn decode(s: &str) -> Result<Vec<f64>, String> {
        let bytes = STANDARD.decode(s).map_err(|e| e.to_string())?;
        if bytes.len() % 8 != 0 {
            return Err(format!("{} bytes is not a whole number of f64", bytes.len()));
        }
        Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
    }

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&encode(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let s = String::deserialize(d)?;
        decode(&s).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub n_in: usize,
    pub n_out: usize,
    /// Row-major `n_out × n_in`.
    #[serde(with = "b64")]
    pub weights: Vec<f64>,
    #[serde(with = "b64")]
    pub biases: Vec<f64>,
}

impl Layer {
    fn affine(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_out)
            .map(|o| {
                let w = &self.weights[o * self.n_in..(o + 1) * self.n_in];
                self.biases[o] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect()
    }
}

fn activate(kind: Activation, z: &[f64]) -> Vec<f64> {
    match kind {
        Activation::Rectifier => z.iter().map(|&v| v.max(0.0)).collect(),
        Activation::Logistic => z.iter().map(|&v| 1.0 / (1.0 + (-v).exp())).collect(),
        Activation::Tanh => z.iter().map(|&v| v.tanh()).collect(),
        Activation::Identity => z.to_vec(),
        Activation::Softmax => {
            let m = z.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            let e: Vec<f64> = z.iter().map(|&v| (v - m).exp()).collect();
            let s: f64 = e.iter().sum();
            e.into_iter().map(|v| v / s).collect()
        }
    }
}

/// Multiply `upstream` (dL/da) by the activation Jacobian to get dL/dz.
fn backprop_activation(kind: Activation, z: &[f64], a: &[f64], upstream: &[f64]) -> Vec<f64> {
    match kind {
        Activation::Rectifier => z.iter().zip(upstream).map(|(&zv, &g)| if zv > 0.0 { g } else { 0.0 }).collect(),
        Activation::Logistic => a.iter().zip(upstream).map(|(&av, &g)| g * av * (1.0 - av)).collect(),
        Activation::Tanh => a.iter().zip(upstream).map(|(&av, &g)| g * (1.0 - av * av)).collect(),
        Activation::Identity => upstream.to_vec(),
        Activation::Softmax => {
            let dot: f64 = a.iter().zip(upstream).map(|(x, y)| x * y).sum();
            a.iter().zip(upstream).map(|(&av, &g)| av * (g - dot)).collect()
        }
    }
}

const PROB_FLOOR: f64 = 1e-12;

fn sample_loss(loss: Loss, out_act: Activation, a: &[f64], y: &[f64]) -> f64 {
    match loss {
        Loss::Mse => a.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / a.len() as f64,
        Loss::CrossEntropy => match out_act {
            Activation::Softmax => -y.iter().zip(a).map(|(t, p)| t * p.max(PROB_FLOOR).ln()).sum::<f64>(),
            _ => -y
                .iter()
                .zip(a)
                .map(|(t, p)| t * p.max(PROB_FLOOR).ln() + (1.0 - t) * (1.0 - p).max(PROB_FLOOR).ln())
                .sum::<f64>(),
        },
    }
}

/// Gradients with the same shapes as the network's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    fn zeros(layers: &[Layer]) -> Self {
        Gradients {
            weights: layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            biases: layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
        }
    }

    fn norm(&self) -> f64 {
        self.weights
            .iter()
            .chain(&self.biases)
            .flat_map(|v| v.iter())
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }

    fn scale(&mut self, s: f64) {
        for v in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            v.iter_mut().for_each(|g| *g *= s);
        }
    }
}

/// Pre- and post-activation values of every layer for one input.
#[derive(Debug, Clone)]
pub struct Activations {
    pub pre: Vec<Vec<f64>>,
    /// `post[0]` is the input; `post[l + 1]` the output of layer `l`.
    pub post: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub spec: NetworkSpec,
    pub layers: Vec<Layer>,
    /// Mean training loss per epoch.
    pub training_curve: Vec<f64>,
    /// Loss on the training set before the first update.
    pub initial_loss: Option<f64>,
}

impl Network {
    /// Glorot-uniform weights, zero biases, seeded by `spec.seed`.
    pub fn init(spec: &NetworkSpec) -> Result<Self> {
        spec.validate()?;
        let mut rng = rng_from_seed(derive_seed(spec.seed, &[0x1417]));
        let layers = spec
            .layer_sizes
            .windows(2)
            .map(|w| {
                let (n_in, n_out) = (w[0], w[1]);
                let limit = (6.0 / (n_in + n_out) as f64).sqrt();
                Layer {
                    n_in,
                    n_out,
                    weights: (0..n_in * n_out).map(|_| rng.random_range(-limit..limit)).collect(),
                    biases: vec![0.0; n_out],
                }
            })
            .collect();
        Ok(Network { spec: spec.clone(), layers, training_curve: Vec::new(), initial_loss: None })
    }

    fn activation_of(&self, layer: usize) -> Activation {
        if layer + 1 == self.layers.len() {
            self.spec.output_activation
        } else if self.spec.linear_layers.contains(&layer) {
            Activation::Identity
        } else {
            self.spec.hidden_activation
        }
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].n_in
    }

    pub fn forward(&self, x: &[f64]) -> Activations {
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post = Vec::with_capacity(self.layers.len() + 1);
        post.push(x.to_vec());
        for (l, layer) in self.layers.iter().enumerate() {
            let z = layer.affine(post.last().expect("input present"));
            post.push(activate(self.activation_of(l), &z));
            pre.push(z);
        }
        Activations { pre, post }
    }

    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        self.forward(x).post.pop().expect("output layer")
    }

    /// Output of hidden layer `layer` (0-based over weight layers).
    pub fn hidden_output(&self, x: &[f64], layer: usize) -> Vec<f64> {
        self.forward(x).post.swap_remove(layer + 1)
    }

    /// Mean loss over the samples.
    pub fn loss(&self, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> f64 {
        let total: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| sample_loss(self.spec.loss, self.spec.output_activation, &self.predict(x), y))
            .sum();
        total / xs.len() as f64
    }

    fn output_delta(&self, acts: &Activations, y: &[f64]) -> Vec<f64> {
        let l = self.layers.len() - 1;
        let a = &acts.post[l + 1];
        let z = &acts.pre[l];
        let out = self.spec.output_activation;
        match (self.spec.loss, out) {
            (Loss::CrossEntropy, Activation::Softmax | Activation::Logistic) => {
                a.iter().zip(y).map(|(p, t)| p - t).collect()
            }
            (Loss::Mse, _) => {
                let n = a.len() as f64;
                let up: Vec<f64> = a.iter().zip(y).map(|(p, t)| 2.0 * (p - t) / n).collect();
                backprop_activation(out, z, a, &up)
            }
            (Loss::CrossEntropy, _) => unreachable!("rejected by validate"),
        }
    }

    /// Exact gradients of the mean loss over the batch, plus that loss.
    pub fn backward(&self, xs: &[&[f64]], ys: &[&[f64]]) -> (Gradients, f64) {
        let mut g = Gradients::zeros(&self.layers);
        let mut total = 0.0;
        for (x, y) in xs.iter().zip(ys) {
            let acts = self.forward(x);
            total += sample_loss(self.spec.loss, self.spec.output_activation, acts.post.last().expect("output"), y);
            let mut delta = self.output_delta(&acts, y);
            for l in (0..self.layers.len()).rev() {
                let layer = &self.layers[l];
                let input = &acts.post[l];
                let gw = &mut g.weights[l];
                for o in 0..layer.n_out {
                    let d = delta[o];
                    if d != 0.0 {
                        for (gv, &iv) in gw[o * layer.n_in..(o + 1) * layer.n_in].iter_mut().zip(input) {
                            *gv += d * iv;
                        }
                    }
                    g.biases[l][o] += d;
                }
                if l > 0 {
                    let mut up = vec![0.0; layer.n_in];
                    for (o, &d) in delta.iter().enumerate() {
                        if d != 0.0 {
                            for (u, &w) in up.iter_mut().zip(&layer.weights[o * layer.n_in..(o + 1) * layer.n_in]) {
                                *u += w * d;
                            }
                        }
                    }
                    delta = backprop_activation(self.activation_of(l - 1), &acts.pre[l - 1], &acts.post[l], &up);
                }
            }
        }
        let n = xs.len() as f64;
        g.scale(1.0 / n);
        (g, total / n)
    }

    fn apply(&mut self, g: &Gradients, lr: f64) {
        for (l, layer) in self.layers.iter_mut().enumerate() {
            layer.weights.iter_mut().zip(&g.weights[l]).for_each(|(w, d)| *w -= lr * d);
            layer.biases.iter_mut().zip(&g.biases[l]).for_each(|(b, d)| *b -= lr * d);
        }
    }

    /// Minibatch gradient descent for `spec.epochs` epochs.
    ///
    /// Samples are put in a canonical (lexicographic) order before the seeded
    /// shuffle, so the caller's row order does not affect the result.
    pub fn train(mut self, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> Result<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::invalid("training needs equal, non-zero numbers of inputs and targets"));
        }
        let width = self.input_width();
        if xs.iter().any(|x| x.len() != width) {
            return Err(Error::invalid(format!("inputs must have width {width}")));
        }
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by(|&a, &b| lex_cmp(&xs[a], &xs[b]).then_with(|| lex_cmp(&ys[a], &ys[b])));

        let initial = self.loss(xs, ys);
        check_finite(initial, self.spec.learning_rate)?;
        self.initial_loss = Some(initial);
        let mut rng = rng_from_seed(derive_seed(self.spec.seed, &[0x5a1e]));
        let lr = self.spec.learning_rate;
        for _ in 0..self.spec.epochs {
            let mut perm = order.clone();
            perm.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            for chunk in perm.chunks(self.spec.batch) {
                let bx: Vec<&[f64]> = chunk.iter().map(|&i| xs[i].as_slice()).collect();
                let by: Vec<&[f64]> = chunk.iter().map(|&i| ys[i].as_slice()).collect();
                let (mut g, batch_loss) = self.backward(&bx, &by);
                check_finite(batch_loss, lr)?;
                epoch_loss += batch_loss * chunk.len() as f64;
                if let Some(max) = self.spec.clip_norm {
                    let norm = g.norm();
                    if norm > max {
                        g.scale(max / norm);
                    }
                }
                self.apply(&g, lr);
            }
            self.training_curve.push(epoch_loss / xs.len() as f64);
        }
        Ok(self)
    }
}

fn check_finite(loss: f64, lr: f64) -> Result<()> {
    if loss.is_finite() {
        Ok(())
    } else {
        Err(Error::Divergence(format!(
            "loss became non-finite at learning rate {lr}; try a smaller learning rate"
        )))
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| a.len().cmp(&b.len()))
}
