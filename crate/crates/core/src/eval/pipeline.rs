use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

use super::folds::split;
use super::metrics::{compute_metrics, Metrics};
use crate::classify::{fit, ClassifierSpec, TrainedModel};
use crate::error::{Error, Result};
use crate::features::matrix::MinMaxScaler;
use crate::label::Label;
use crate::rng::derive_seed;
use crate::select::{fit_selector, SelectorConfig, SelectorKind, SelectorModel};

/// Scaling → selection → classifier, all fitted on the same training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub selector: SelectorKind,
    pub selector_cfg: SelectorConfig,
    pub classifier: ClassifierSpec,
    /// Rows arrive already scaled over the whole corpus; skip the per-fold fit.
    #[serde(default)]
    pub global_scaling: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPipeline {
    pub scaler: MinMaxScaler,
    pub selector: SelectorModel,
    pub model: TrainedModel,
}

impl FittedPipeline {
    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<Label>> {
        rows.iter()
            .map(|r| self.model.predict(&self.selector.transform_row(&self.scaler.transform_row(r))?))
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Fit every stage on `rows` only; `seed` drives the selector and classifier.
pub fn fit_pipeline(rows: &[Vec<f64>], labels: &[Label], spec: &PipelineSpec, seed: u64) -> Result<FittedPipeline> {
    let scaler = if spec.global_scaling {
        let d = rows.first().map_or(0, Vec::len);
        MinMaxScaler { mins: vec![0.0; d], maxs: vec![1.0; d] }
    } else {
        MinMaxScaler::fit(rows)?
    };
    let scaled = scaler.transform(rows);
    let selector = fit_selector(spec.selector, &scaled, labels, &spec.selector_cfg, derive_seed(seed, &[1]))?;
    let reduced = selector.transform(&scaled)?;
    let model = fit(&spec.classifier.with_seed(derive_seed(seed, &[2])), &reduced, labels)?;
    Ok(FittedPipeline { scaler, selector, model })
}

pub fn fold_seed(seed: u64, fold: usize) -> u64 {
    derive_seed(seed, &[0xf01d, fold as u64])
}

/// Fit the training side of `fold` (every row whose assignment differs).
pub fn fit_fold(
    rows: &[Vec<f64>],
    labels: &[Label],
    assignment: &[usize],
    fold: usize,
    spec: &PipelineSpec,
    seed: u64,
) -> Result<FittedPipeline> {
    let (train, _) = split(assignment, fold);
    let tr: Vec<Vec<f64>> = train.iter().map(|&i| rows[i].clone()).collect();
    let tl: Vec<Label> = train.iter().map(|&i| labels[i]).collect();
    fit_pipeline(&tr, &tl, spec, fold_seed(seed, fold))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub folds: Vec<Metrics>,
    pub mean: Metrics,
}

pub fn cross_validate(
    rows: &[Vec<f64>],
    labels: &[Label],
    assignment: &[usize],
    k: usize,
    spec: &PipelineSpec,
    seed: u64,
) -> Result<CvResult> {
    if rows.len() != labels.len() || rows.len() != assignment.len() {
        return Err(Error::invalid("rows, labels and fold assignment differ in length"));
    }
    let folds = (0..k)
        .map(|f| {
            let (_, test) = split(assignment, f);
            if test.is_empty() {
                return Err(Error::invalid(format!("fold {f} is empty")));
            }
            let p = fit_fold(rows, labels, assignment, f, spec, seed)?;
            let xs: Vec<Vec<f64>> = test.iter().map(|&i| rows[i].clone()).collect();
            let ys: Vec<Label> = test.iter().map(|&i| labels[i]).collect();
            compute_metrics(&ys, &p.predict(&xs)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = Metrics::mean(&folds);
    Ok(CvResult { folds, mean })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub spec: ClassifierSpec,
    pub mean_accuracy: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearch {
    pub best_index: usize,
    pub best_spec: ClassifierSpec,
    pub best: CvResult,
    pub points: Vec<GridPoint>,
}

/// Cross-validate each grid point on the same folds and seeds; best mean
/// accuracy wins, earlier points win ties. Failing points are recorded.
#[allow(clippy::too_many_arguments)]
pub fn grid_search(
    rows: &[Vec<f64>],
    labels: &[Label],
    assignment: &[usize],
    k: usize,
    selector: SelectorKind,
    selector_cfg: &SelectorConfig,
    grid: &[ClassifierSpec],
    global_scaling: bool,
    seed: u64,
) -> Result<GridSearch> {
    if grid.is_empty() {
        return Err(Error::invalid("hyperparameter grid is empty"));
    }
    let results: Vec<Result<CvResult>> = grid
        .par_iter()
        .map(|c| {
            let spec = PipelineSpec { selector, selector_cfg: selector_cfg.clone(), classifier: c.clone(), global_scaling };
            cross_validate(rows, labels, assignment, k, &spec, seed)
        })
        .collect();
    let mut best: Option<(usize, &CvResult)> = None;
    for (i, r) in results.iter().enumerate() {
        if let Ok(cv) = r {
            if best.is_none_or(|(_, b)| cv.mean.accuracy > b.mean.accuracy) {
                best = Some((i, cv));
            }
        }
    }
    let points = grid
        .iter()
        .zip(&results)
        .map(|(spec, r)| GridPoint {
            spec: spec.clone(),
            mean_accuracy: r.as_ref().ok().map(|cv| cv.mean.accuracy),
            error: r.as_ref().err().map(|e| e.to_string()),
        })
        .collect();
    match best {
        Some((i, cv)) => Ok(GridSearch { best_index: i, best_spec: grid[i].clone(), best: cv.clone(), points }),
        None => Err(results.into_iter().find_map(|r| r.err()).expect("all points failed")),
    }
}
