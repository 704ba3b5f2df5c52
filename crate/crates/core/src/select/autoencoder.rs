use serde::{Deserialize, Serialize};

use super::{SelectorModel, SelectorParams};
use crate::error::{Error, Result};
use crate::neural::{Activation, Loss, Network, NetworkSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AutoencoderConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub batch: usize,
    pub learning_rate: f64,
    pub clip_norm: f64,
    pub seed: u64,
}

impl Default for AutoencoderConfig {
    fn default() -> Self {
        AutoencoderConfig { hidden: 128, epochs: 200, batch: 32, learning_rate: 1e-3, clip_norm: 5.0, seed: 0 }
    }
}

/// Train `input → hidden → bottleneck → hidden → input` on reconstruction MSE.
/// The bottleneck is linear; the other hidden layers are rectified.
/// Inputs are expected in [0, 1] to match the logistic output layer.
pub fn autoencoder_fit(rows: &[Vec<f64>], bottleneck: usize, cfg: &AutoencoderConfig) -> Result<SelectorModel> {
    let d = rows.first().map_or(0, Vec::len);
    if d == 0 {
        return Err(Error::invalid("autoencoder needs at least one row and one feature"));
    }
    if bottleneck == 0 || bottleneck > d {
        return Err(Error::invalid(format!("bottleneck {bottleneck} must be in 1..={d}")));
    }
    let spec = NetworkSpec {
        layer_sizes: vec![d, cfg.hidden, bottleneck, cfg.hidden, d],
        hidden_activation: Activation::Rectifier,
        output_activation: Activation::Logistic,
        loss: Loss::Mse,
        seed: cfg.seed,
        learning_rate: cfg.learning_rate,
        epochs: cfg.epochs,
        batch: cfg.batch,
        clip_norm: Some(cfg.clip_norm),
        // a rectified bottleneck of width 1–2 dies easily and then encodes nothing
        linear_layers: vec![1],
    };
    let network = Network::init(&spec)?.train(rows, rows)?;
    Ok(SelectorModel { input_dim: d, output_dim: bottleneck, params: SelectorParams::Autoencoder { network } })
}
