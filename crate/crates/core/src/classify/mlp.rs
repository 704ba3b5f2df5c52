//! Multilayer perceptron classifier on the shared network engine.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::Label;
use crate::neural::{Activation, Loss, Network, NetworkSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpSpec {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
}

impl Default for MlpSpec {
    fn default() -> Self {
        MlpSpec { hidden: vec![100], activation: Activation::Rectifier, learning_rate: 0.01, epochs: 200, batch: 32, seed: 0 }
    }
}

impl MlpSpec {
    pub fn network_spec(&self, input_dim: usize) -> NetworkSpec {
        let mut layer_sizes = vec![input_dim];
        layer_sizes.extend(&self.hidden);
        layer_sizes.push(2);
        NetworkSpec {
            layer_sizes,
            hidden_activation: self.activation,
            output_activation: Activation::Softmax,
            loss: Loss::CrossEntropy,
            seed: self.seed,
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            batch: self.batch,
            clip_norm: None,
            linear_layers: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden.contains(&0) || self.epochs == 0 {
            return Err(Error::invalid("mlp hidden sizes and epochs must be >= 1"));
        }
        self.network_spec(1).validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub spec: MlpSpec,
    pub network: Network,
}

impl MlpModel {
    /// [P(no-crackle), P(crackle)].
    pub fn probabilities(&self, row: &[f64]) -> Vec<f64> {
        self.network.predict(row)
    }

    pub fn predict(&self, row: &[f64]) -> Label {
        let p = self.probabilities(row);
        if p[1] > p[0] {
            Label::Crackle
        } else {
            Label::NoCrackle
        }
    }
}

pub fn mlp_fit(rows: &[Vec<f64>], labels: &[Label], spec: &MlpSpec) -> Result<MlpModel> {
    spec.validate()?;
    super::check_training(rows, labels)?;
    let targets: Vec<Vec<f64>> = labels
        .iter()
        .map(|l| if l.is_positive() { vec![0.0, 1.0] } else { vec![1.0, 0.0] })
        .collect();
    let network = Network::init(&spec.network_spec(rows[0].len()))?.train(rows, &targets)?;
    Ok(MlpModel { spec: spec.clone(), network })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand_distr::{Distribution, Normal};

    fn blobs(seed: u64) -> (Vec<Vec<f64>>, Vec<Label>) {
        let mut rng = rng_from_seed(seed);
        let normal = Normal::new(0.0, 0.6).unwrap();
        let labels: Vec<Label> = (0..100).map(|i| Label::from_index(i % 2)).collect();
        let rows = labels.iter().map(|l| vec![l.sign() + normal.sample(&mut rng), normal.sample(&mut rng)]).collect();
        (rows, labels)
    }

    #[test]
    fn learns_blobs_with_normalised_probabilities() {
        let (rows, labels) = blobs(1);
        let spec = MlpSpec { hidden: vec![8], seed: 2, ..Default::default() };
        let m = mlp_fit(&rows, &labels, &spec).unwrap();
        let acc = rows.iter().zip(&labels).filter(|(r, l)| m.predict(r) == **l).count() as f64 / 100.0;
        assert!(acc >= 0.95, "{acc}");
        for r in &rows {
            let p = m.probabilities(r);
            assert!((p[0] + p[1] - 1.0).abs() < 1e-9);
            assert_eq!(m.predict(r), if p[1] > p[0] { Label::Crackle } else { Label::NoCrackle });
        }
        assert_eq!(m, mlp_fit(&rows, &labels, &spec).unwrap());
    }
}
