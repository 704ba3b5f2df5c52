//! Six binary classifiers behind one fit/predict contract.

pub mod forest;
pub mod kmeans;
pub mod knn;
pub mod mlp;
pub mod som;
pub mod svm;

pub use forest::{rf_fit, ForestModel, RfSpec};
pub use kmeans::{kmeans_fit, KmeansModel, KmeansSpec};
pub use knn::{knn_fit, KnnModel, KnnSpec};
pub use mlp::{mlp_fit, MlpModel, MlpSpec};
pub use som::{som_fit, SomModel, SomSpec};
pub use svm::{svm_fit, SvmModel, SvmSpec};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::label::Label;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Knn,
    Rf,
    Svm,
    Mlp,
    Kmeans,
    Som,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 6] = [
        ClassifierKind::Knn,
        ClassifierKind::Rf,
        ClassifierKind::Svm,
        ClassifierKind::Mlp,
        ClassifierKind::Kmeans,
        ClassifierKind::Som,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "knn",
            ClassifierKind::Rf => "rf",
            ClassifierKind::Svm => "svm",
            ClassifierKind::Mlp => "mlp",
            ClassifierKind::Kmeans => "kmeans",
            ClassifierKind::Som => "som",
        }
    }

    pub fn default_spec(self) -> ClassifierSpec {
        match self {
            ClassifierKind::Knn => ClassifierSpec::Knn(KnnSpec::default()),
            ClassifierKind::Rf => ClassifierSpec::Rf(RfSpec::default()),
            ClassifierKind::Svm => ClassifierSpec::Svm(SvmSpec::default()),
            ClassifierKind::Mlp => ClassifierSpec::Mlp(MlpSpec::default()),
            ClassifierKind::Kmeans => ClassifierSpec::Kmeans(KmeansSpec::default()),
            ClassifierKind::Som => ClassifierSpec::Som(SomSpec::default()),
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown classifier {s:?} (expected knn, rf, svm, mlp, kmeans or som)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassifierSpec {
    Knn(KnnSpec),
    Rf(RfSpec),
    Svm(SvmSpec),
    Mlp(MlpSpec),
    Kmeans(KmeansSpec),
    Som(SomSpec),
}

impl ClassifierSpec {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            ClassifierSpec::Knn(_) => ClassifierKind::Knn,
            ClassifierSpec::Rf(_) => ClassifierKind::Rf,
            ClassifierSpec::Svm(_) => ClassifierKind::Svm,
            ClassifierSpec::Mlp(_) => ClassifierKind::Mlp,
            ClassifierSpec::Kmeans(_) => ClassifierKind::Kmeans,
            ClassifierSpec::Som(_) => ClassifierKind::Som,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ClassifierSpec::Knn(s) => s.validate(),
            ClassifierSpec::Rf(s) => s.validate(),
            ClassifierSpec::Svm(s) => s.validate(),
            ClassifierSpec::Mlp(s) => s.validate(),
            ClassifierSpec::Kmeans(s) => s.validate(),
            ClassifierSpec::Som(s) => s.validate(),
        }
    }

    /// Copy with the random seed replaced (no-op for deterministic kinds).
    pub fn with_seed(&self, seed: u64) -> ClassifierSpec {
        let mut s = self.clone();
        match &mut s {
            ClassifierSpec::Rf(r) => r.seed = seed,
            ClassifierSpec::Mlp(m) => m.seed = seed,
            ClassifierSpec::Kmeans(k) => k.seed = seed,
            ClassifierSpec::Som(o) => o.seed = seed,
            ClassifierSpec::Knn(_) | ClassifierSpec::Svm(_) => {}
        }
        s
    }

    /// Hyperparameters as compact JSON, without the seed.
    pub fn params_string(&self) -> String {
        let mut v = serde_json::to_value(self.with_seed(0)).unwrap_or_default();
        if let Some(obj) = v.as_object_mut() {
            obj.remove("kind");
            obj.remove("seed");
        }
        v.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelParams {
    Knn(KnnModel),
    Rf(ForestModel),
    Svm(SvmModel),
    Mlp(MlpModel),
    Kmeans(KmeansModel),
    Som(SomModel),
}

/// A fitted classifier. `predict` never sees labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub version: u32,
    pub input_dim: usize,
    pub params: ModelParams,
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        match self.params {
            ModelParams::Knn(_) => ClassifierKind::Knn,
            ModelParams::Rf(_) => ClassifierKind::Rf,
            ModelParams::Svm(_) => ClassifierKind::Svm,
            ModelParams::Mlp(_) => ClassifierKind::Mlp,
            ModelParams::Kmeans(_) => ClassifierKind::Kmeans,
            ModelParams::Som(_) => ClassifierKind::Som,
        }
    }

    pub fn predict(&self, row: &[f64]) -> Result<Label> {
        if row.len() != self.input_dim {
            return Err(Error::invalid(format!("model expects {} features, got {}", self.input_dim, row.len())));
        }
        Ok(match &self.params {
            ModelParams::Knn(m) => m.predict(row),
            ModelParams::Rf(m) => m.predict(row),
            ModelParams::Svm(m) => m.predict(row),
            ModelParams::Mlp(m) => m.predict(row),
            ModelParams::Kmeans(m) => m.predict(row),
            ModelParams::Som(m) => m.predict(row),
        })
    }

    pub fn predict_all(&self, rows: &[Vec<f64>]) -> Result<Vec<Label>> {
        rows.iter().map(|r| self.predict(r)).collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let m: TrainedModel = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if m.version != MODEL_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "{}: model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                path.display(),
                m.version
            )));
        }
        Ok(m)
    }
}

pub fn fit(spec: &ClassifierSpec, rows: &[Vec<f64>], labels: &[Label]) -> Result<TrainedModel> {
    check_training(rows, labels)?;
    let params = match spec {
        ClassifierSpec::Knn(s) => ModelParams::Knn(knn_fit(rows, labels, s)?),
        ClassifierSpec::Rf(s) => ModelParams::Rf(rf_fit(rows, labels, s)?),
        ClassifierSpec::Svm(s) => ModelParams::Svm(svm_fit(rows, labels, s)?),
        ClassifierSpec::Mlp(s) => ModelParams::Mlp(mlp_fit(rows, labels, s)?),
        ClassifierSpec::Kmeans(s) => ModelParams::Kmeans(kmeans_fit(rows, labels, s)?),
        ClassifierSpec::Som(s) => ModelParams::Som(som_fit(rows, labels, s)?),
    };
    Ok(TrainedModel { version: MODEL_FORMAT_VERSION, input_dim: rows[0].len(), params })
}

pub(crate) fn check_training(rows: &[Vec<f64>], labels: &[Label]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    if rows.len() != labels.len() {
        return Err(Error::invalid(format!("{} rows but {} labels", rows.len(), labels.len())));
    }
    let d = rows[0].len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(Error::invalid("training rows must share a non-zero width"));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("training rows contain non-finite values"));
    }
    Ok(())
}

/// Strict majority, `None` on a tie.
pub(crate) fn majority(labels: &[Label]) -> Option<Label> {
    let pos = labels.iter().filter(|l| l.is_positive()).count();
    match (2 * pos).cmp(&labels.len()) {
        std::cmp::Ordering::Greater => Some(Label::Crackle),
        std::cmp::Ordering::Less => Some(Label::NoCrackle),
        std::cmp::Ordering::Equal => None,
    }
}

/// Majority label per group; ties go to no-crackle, empty groups to `empty(group)`.
pub(crate) fn map_majority(groups: usize, assignment: &[usize], labels: &[Label], empty: impl Fn(usize) -> Label) -> Vec<Label> {
    let mut counts = vec![[0usize; 2]; groups];
    for (&g, l) in assignment.iter().zip(labels) {
        counts[g][l.index()] += 1;
    }
    counts
        .iter()
        .enumerate()
        .map(|(g, c)| match c {
            [0, 0] => empty(g),
            [neg, pos] if pos > neg => Label::Crackle,
            _ => Label::NoCrackle,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Vec<Vec<f64>>, Vec<Label>) {
        let rows: Vec<Vec<f64>> = (0..24).map(|i| vec![(i % 2) as f64 * 2.0 + 0.05 * i as f64, 0.3]).collect();
        let labels = (0..24).map(|i| Label::from_index(i % 2)).collect();
        (rows, labels)
    }

    fn small(kind: ClassifierKind) -> ClassifierSpec {
        match kind.default_spec() {
            ClassifierSpec::Knn(_) => ClassifierSpec::Knn(KnnSpec { n_neighbors: 3, ..Default::default() }),
            ClassifierSpec::Rf(_) => ClassifierSpec::Rf(RfSpec { n_estimators: 5, ..Default::default() }),
            ClassifierSpec::Mlp(_) => ClassifierSpec::Mlp(MlpSpec { hidden: vec![4], epochs: 200, learning_rate: 0.1, ..Default::default() }),
            ClassifierSpec::Som(_) => ClassifierSpec::Som(SomSpec { rows: 2, cols: 2, ..Default::default() }),
            other => other,
        }
    }

    #[test]
    fn every_kind_fits_predicts_and_round_trips() {
        let (rows, labels) = toy();
        let dir = tempfile::tempdir().unwrap();
        for kind in ClassifierKind::ALL {
            let spec = small(kind).with_seed(3);
            let m = fit(&spec, &rows, &labels).unwrap();
            assert_eq!(m.kind(), kind);
            let preds = m.predict_all(&rows).unwrap();
            let acc = preds.iter().zip(&labels).filter(|(a, b)| a == b).count();
            assert!(acc >= 20, "{kind}: {acc}/24");
            let path = dir.path().join(format!("{kind}.json"));
            m.save(&path).unwrap();
            let back = TrainedModel::load(&path).unwrap();
            assert_eq!(back, m, "{kind}");
            assert!(m.predict(&[1.0]).is_err());
        }
    }

    #[test]
    fn spec_json_and_names() {
        for kind in ClassifierKind::ALL {
            assert_eq!(kind.as_str().parse::<ClassifierKind>().unwrap(), kind);
            let spec = kind.default_spec();
            let json = serde_json::to_string(&spec).unwrap();
            assert_eq!(serde_json::from_str::<ClassifierSpec>(&json).unwrap(), spec);
            assert!(!spec.params_string().contains("seed"));
        }
        let s: ClassifierSpec = serde_json::from_str(r#"{"kind":"knn","n_neighbors":1,"p":1}"#).unwrap();
        assert_eq!(s, ClassifierSpec::Knn(KnnSpec { n_neighbors: 1, p: 1.0, leaf_size: 30 }));
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let (rows, labels) = toy();
        let mut m = fit(&ClassifierKind::Knn.default_spec(), &rows, &labels).unwrap();
        m.version = 99;
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        m.save(&p).unwrap();
        assert!(matches!(TrainedModel::load(&p), Err(Error::Format(_))));
    }

    #[test]
    fn training_checks() {
        assert!(check_training(&[vec![1.0]], &[]).is_err());
        assert!(check_training(&[vec![f64::NAN]], &[Label::Crackle]).is_err());
        assert!(check_training(&[vec![1.0], vec![1.0, 2.0]], &[Label::Crackle; 2]).is_err());
        assert_eq!(majority(&[Label::Crackle, Label::NoCrackle]), None);
        assert_eq!(map_majority(3, &[0, 0, 1], &[Label::Crackle, Label::NoCrackle, Label::Crackle], |_| Label::Crackle),
            vec![Label::NoCrackle, Label::Crackle, Label::Crackle]);
    }
}
