//! Feature selection and reduction: χ² filtering, PCA and a bottleneck autoencoder.

mod autoencoder;
mod chi2;
mod pca;

pub use autoencoder::{autoencoder_fit, AutoencoderConfig};
pub use chi2::{chi2_fit, chi2_scores};
pub use pca::pca_fit;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::label::Label;
use crate::neural::Network;

pub const DEFAULT_OUTPUT_DIM: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectorKind {
    None,
    Chi2,
    Pca,
    Autoencoder,
}

impl SelectorKind {
    pub const ALL: [SelectorKind; 4] = [SelectorKind::None, SelectorKind::Chi2, SelectorKind::Pca, SelectorKind::Autoencoder];

    pub fn as_str(self) -> &'static str {
        match self {
            SelectorKind::None => "none",
            SelectorKind::Chi2 => "chi2",
            SelectorKind::Pca => "pca",
            SelectorKind::Autoencoder => "autoencoder",
        }
    }
}

impl fmt::Display for SelectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SelectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SelectorKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown selector {s:?} (expected none, chi2, pca or autoencoder)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SelectorParams {
    None,
    Chi2 {
        /// Selected columns, best score first.
        indices: Vec<usize>,
        scores: Vec<f64>,
    },
    Pca {
        mean: Vec<f64>,
        /// One row per component, unit length.
        components: Vec<Vec<f64>>,
        explained_variance: Vec<f64>,
        explained_variance_ratio: Vec<f64>,
    },
    Autoencoder {
        network: Network,
    },
}

/// A fitted, immutable feature transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorModel {
    pub input_dim: usize,
    pub output_dim: usize,
    pub params: SelectorParams,
}

/// Index of the bottleneck among the autoencoder's weight layers.
const BOTTLENECK_LAYER: usize = 1;

impl SelectorModel {
    pub fn identity(input_dim: usize) -> Self {
        SelectorModel { input_dim, output_dim: input_dim, params: SelectorParams::None }
    }

    pub fn kind(&self) -> SelectorKind {
        match self.params {
            SelectorParams::None => SelectorKind::None,
            SelectorParams::Chi2 { .. } => SelectorKind::Chi2,
            SelectorParams::Pca { .. } => SelectorKind::Pca,
            SelectorParams::Autoencoder { .. } => SelectorKind::Autoencoder,
        }
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.input_dim {
            return Err(Error::invalid(format!(
                "selector expects {} features, got {}",
                self.input_dim,
                row.len()
            )));
        }
        Ok(match &self.params {
            SelectorParams::None => row.to_vec(),
            SelectorParams::Chi2 { indices, .. } => indices.iter().map(|&j| row[j]).collect(),
            SelectorParams::Pca { mean, components, .. } => components
                .iter()
                .map(|c| c.iter().zip(row).zip(mean).map(|((w, x), m)| w * (x - m)).sum())
                .collect(),
            SelectorParams::Autoencoder { network } => network.hidden_output(row, BOTTLENECK_LAYER),
        })
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }

    /// Map reduced PCA coordinates back to feature space.
    pub fn pca_inverse(&self, reduced: &[f64]) -> Result<Vec<f64>> {
        match &self.params {
            SelectorParams::Pca { mean, components, .. } => {
                let mut out = mean.clone();
                for (c, &z) in components.iter().zip(reduced) {
                    out.iter_mut().zip(c).for_each(|(o, w)| *o += z * w);
                }
                Ok(out)
            }
            _ => Err(Error::invalid("inverse transform is only defined for PCA")),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectorConfig {
    pub output_dim: usize,
    pub autoencoder: AutoencoderConfig,
}

impl Default for SelectorConfig {
    fn default() -> Self {
        SelectorConfig { output_dim: DEFAULT_OUTPUT_DIM, autoencoder: AutoencoderConfig::default() }
    }
}

/// Fit a selector of `kind`. `rows` should already be scaled to [0, 1].
///
/// `cfg.output_dim` is clamped to what the data supports (input width, and
/// n − 1 for PCA) so small folds still produce a model.
pub fn fit_selector(
    kind: SelectorKind,
    rows: &[Vec<f64>],
    labels: &[Label],
    cfg: &SelectorConfig,
    seed: u64,
) -> Result<SelectorModel> {
    let d = rows.first().map(Vec::len).ok_or_else(|| Error::invalid("cannot fit a selector on zero rows"))?;
    let k = cfg.output_dim.min(d).max(1);
    match kind {
        SelectorKind::None => Ok(SelectorModel::identity(d)),
        SelectorKind::Chi2 => chi2_fit(rows, labels, k),
        SelectorKind::Pca => pca_fit(rows, k.min(rows.len().saturating_sub(1)).max(1)),
        SelectorKind::Autoencoder => {
            autoencoder_fit(rows, k, &AutoencoderConfig { seed, ..cfg.autoencoder.clone() })
        }
    }
}
