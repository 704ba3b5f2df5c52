//! Experiment configuration file (TOML).

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use auscult_core::classify::{
    ClassifierKind, ClassifierSpec, KmeansSpec, KnnSpec, MlpSpec, RfSpec, SomSpec, SvmSpec,
};
use auscult_core::decompose::{DecomposeConfig, Decomposition};
use auscult_core::eval::{ClassifierGrid, MatrixConfig};
use auscult_core::features::{FeatureConfig, FeatureSet};
use auscult_core::ingest::PreprocessConfig;
use auscult_core::neural::Activation;
use auscult_core::select::{SelectorConfig, SelectorKind};
use auscult_core::{Error, LabelScheme, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Directory of `.wav` recordings with same-stem `.txt` annotations.
    pub data_dir: Option<PathBuf>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub scheme: LabelScheme,
    /// Every random choice derives from it. It may come from `--seed`
    /// instead, but some source must provide it.
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default)]
    pub group_by_patient: bool,
    #[serde(default)]
    pub paper_compat_scaling: bool,
    #[serde(default)]
    pub preprocess: PreprocessConfig,
    #[serde(default)]
    pub decompositions: Vec<Decomposition>,
    #[serde(default)]
    pub feature_sets: Vec<FeatureSet>,
    #[serde(default)]
    pub selectors: Vec<SelectorKind>,
    #[serde(default)]
    pub selector: SelectorConfig,
    #[serde(default)]
    pub decompose: DecomposeConfig,
    #[serde(default)]
    pub features: FeatureConfig,
    #[serde(default)]
    pub classifiers: ClassifierGrids,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_folds() -> usize {
    5
}

/// Hyperparameter grids; list-valued keys are crossed in field order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierGrids {
    pub knn: Option<KnnGrid>,
    pub rf: Option<RfGrid>,
    pub svm: Option<SvmGrid>,
    pub mlp: Option<MlpGrid>,
    pub kmeans: Option<KmeansGrid>,
    pub som: Option<SomGrid>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnnGrid {
    pub n_neighbors: Vec<usize>,
    pub p: Vec<f64>,
    pub leaf_size: Vec<usize>,
}

impl Default for KnnGrid {
    fn default() -> Self {
        let d = KnnSpec::default();
        KnnGrid { n_neighbors: vec![d.n_neighbors], p: vec![d.p], leaf_size: vec![d.leaf_size] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfGrid {
    pub n_estimators: Vec<usize>,
    /// 0 means unlimited depth.
    pub max_depth: Vec<usize>,
}

impl Default for RfGrid {
    fn default() -> Self {
        RfGrid { n_estimators: vec![RfSpec::default().n_estimators], max_depth: vec![0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmGrid {
    pub c: Vec<f64>,
    pub gamma: Vec<f64>,
    pub tolerance: f64,
    pub max_passes: usize,
}

impl Default for SvmGrid {
    fn default() -> Self {
        let d = SvmSpec::default();
        SvmGrid { c: vec![d.c], gamma: vec![d.gamma], tolerance: d.tolerance, max_passes: d.max_passes }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpGrid {
    pub hidden: Vec<Vec<usize>>,
    pub learning_rate: Vec<f64>,
    pub activation: Activation,
    pub epochs: usize,
    pub batch: usize,
}

impl Default for MlpGrid {
    fn default() -> Self {
        let d = MlpSpec::default();
        MlpGrid {
            hidden: vec![d.hidden],
            learning_rate: vec![d.learning_rate],
            activation: d.activation,
            epochs: d.epochs,
            batch: d.batch,
        }
    }
}

pub type KmeansGrid = KmeansSpec;
pub type SomGrid = SomSpec;

impl ClassifierGrids {
    pub fn expand(&self) -> Vec<ClassifierGrid> {
        let mut out = Vec::new();
        if let Some(g) = &self.knn {
            let mut points = Vec::new();
            for &n_neighbors in &g.n_neighbors {
                for &p in &g.p {
                    for &leaf_size in &g.leaf_size {
                        points.push(ClassifierSpec::Knn(KnnSpec { n_neighbors, p, leaf_size }));
                    }
                }
            }
            out.push(ClassifierGrid { kind: ClassifierKind::Knn, points });
        }
        if let Some(g) = &self.rf {
            let mut points = Vec::new();
            for &n_estimators in &g.n_estimators {
                for &depth in &g.max_depth {
                    let max_depth = (depth > 0).then_some(depth);
                    points.push(ClassifierSpec::Rf(RfSpec { n_estimators, max_depth, seed: 0 }));
                }
            }
            out.push(ClassifierGrid { kind: ClassifierKind::Rf, points });
        }
        if let Some(g) = &self.svm {
            let mut points = Vec::new();
            for &c in &g.c {
                for &gamma in &g.gamma {
                    points.push(ClassifierSpec::Svm(SvmSpec { c, gamma, tolerance: g.tolerance, max_passes: g.max_passes }));
                }
            }
            out.push(ClassifierGrid { kind: ClassifierKind::Svm, points });
        }
        if let Some(g) = &self.mlp {
            let mut points = Vec::new();
            for hidden in &g.hidden {
                for &learning_rate in &g.learning_rate {
                    points.push(ClassifierSpec::Mlp(MlpSpec {
                        hidden: hidden.clone(),
                        activation: g.activation,
                        learning_rate,
                        epochs: g.epochs,
                        batch: g.batch,
                        seed: 0,
                    }));
                }
            }
            out.push(ClassifierGrid { kind: ClassifierKind::Mlp, points });
        }
        if let Some(g) = &self.kmeans {
            out.push(ClassifierGrid::single(ClassifierSpec::Kmeans(g.clone())));
        }
        if let Some(g) = &self.som {
            out.push(ClassifierGrid::single(ClassifierSpec::Som(g.clone())));
        }
        out
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidArgument(format!("config: {}", e.message().trim())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::InvalidArgument(m) => Error::InvalidArgument(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| {
            Error::InvalidArgument("no seed given: pass --seed, set AUSCULT_SEED or add `seed = N` to the config".into())
        })
    }

    /// The validated experiment matrix this file describes.
    pub fn matrix_config(&self) -> Result<MatrixConfig> {
        let classifiers = self.classifiers.expand();
        if classifiers.is_empty() {
            return Err(Error::InvalidArgument("config lists no classifiers (add e.g. a [classifiers.knn] table)".into()));
        }
        let m = MatrixConfig {
            decompositions: self.decompositions.clone(),
            feature_sets: self.feature_sets.clone(),
            selectors: self.selectors.clone(),
            selector: self.selector.clone(),
            classifiers,
            folds: self.folds,
            seed: self.seed()?,
            group_by_patient: self.group_by_patient,
            paper_compat_scaling: self.paper_compat_scaling,
            decompose: self.decompose.clone(),
            features: self.features.clone(),
        };
        m.validate()?;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 3
decompositions = ["none", "emd+dwt"]
feature_sets = ["full"]
selectors = ["none", "pca"]

[classifiers.knn]
n_neighbors = [1, 2]
p = [1]

[classifiers.rf]
max_depth = [0, 8]
"#;

    #[test]
    fn minimal_config_expands_grids() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.folds, 5);
        assert_eq!(c.output_dir, PathBuf::from("out"));
        let m = c.matrix_config().unwrap();
        assert_eq!(m.n_cells(), 2 * 2 * 2);
        assert_eq!(m.classifiers[0].points.len(), 2);
        assert_eq!(
            m.classifiers[1].points[0],
            ClassifierSpec::Rf(RfSpec { n_estimators: 100, max_depth: None, seed: 0 })
        );
    }

    #[test]
    fn bad_configs_are_rejected() {
        for bad in [
            MINIMAL.replace("seed = 3", ""),
            MINIMAL.replace("\"emd+dwt\"", "\"wavelet\""),
            MINIMAL.replace("p = [1]", "p = [1]\nq = 2"),
            MINIMAL.replace("n_neighbors = [1, 2]", "n_neighbors = [0]"),
            MINIMAL.replace("selectors = [\"none\", \"pca\"]", "selectors = []"),
        ] {
            let res = ExperimentConfig::from_toml(&bad).and_then(|c| c.matrix_config());
            assert!(matches!(res, Err(Error::InvalidArgument(_))), "{bad}");
        }
    }

    #[test]
    fn empty_file_is_a_valid_partial_config() {
        let c = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(c.seed, None);
        assert!(c.seed().is_err());
        assert!(c.matrix_config().is_err());
    }

    #[test]
    fn shipped_configs_parse() {
        let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let paper = ExperimentConfig::load(&root.join("paper.toml")).unwrap();
        assert_eq!(paper.matrix_config().unwrap().n_cells(), 6 * 3 * 4 * 6);
        let synth = ExperimentConfig::load(&root.join("synthetic.toml")).unwrap();
        assert!(synth.matrix_config().unwrap().n_cells() > 0);
    }
}
