use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::Instant;

use super::folds::{group_kfold, stratified_kfold};
use super::metrics::Metrics;
use super::pipeline::grid_search;
use crate::classify::{ClassifierKind, ClassifierSpec};
use crate::decompose::{DecomposeConfig, Decomposition};
use crate::error::{Error, Result};
use crate::features::matrix::{FeatureMatrix, MinMaxScaler};
use crate::features::{build_feature_matrix, feature_names, FeatureConfig, FeatureSet};
use crate::ingest::CycleRecord;
use crate::rng::derive_seed;
use crate::select::{SelectorConfig, SelectorKind};

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Hyperparameter grid of one classifier kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierGrid {
    pub kind: ClassifierKind,
    pub points: Vec<ClassifierSpec>,
}

impl ClassifierGrid {
    pub fn single(spec: ClassifierSpec) -> Self {
        ClassifierGrid { kind: spec.kind(), points: vec![spec] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixConfig {
    pub decompositions: Vec<Decomposition>,
    pub feature_sets: Vec<FeatureSet>,
    pub selectors: Vec<SelectorKind>,
    pub selector: SelectorConfig,
    pub classifiers: Vec<ClassifierGrid>,
    pub folds: usize,
    pub seed: u64,
    pub group_by_patient: bool,
    /// Fit min–max scaling once on every row before splitting, as the
    /// reference protocol does. This leaks test-fold ranges into training; off by default.
    #[serde(default)]
    pub paper_compat_scaling: bool,
    pub decompose: DecomposeConfig,
    pub features: FeatureConfig,
}

impl Default for MatrixConfig {
    fn default() -> Self {
        MatrixConfig {
            decompositions: vec![Decomposition::None],
            feature_sets: vec![FeatureSet::Full],
            selectors: vec![SelectorKind::None],
            selector: SelectorConfig::default(),
            classifiers: vec![ClassifierGrid::single(ClassifierKind::Knn.default_spec())],
            folds: 5,
            seed: 0,
            group_by_patient: false,
            paper_compat_scaling: false,
            decompose: DecomposeConfig::default(),
            features: FeatureConfig::default(),
        }
    }
}

impl MatrixConfig {
    pub fn validate(&self) -> Result<()> {
        if self.decompositions.is_empty()
            || self.feature_sets.is_empty()
            || self.selectors.is_empty()
            || self.classifiers.is_empty()
        {
            return Err(Error::invalid("every matrix axis needs at least one entry"));
        }
        if self.folds < 2 {
            return Err(Error::invalid("folds must be >= 2"));
        }
        if self.selector.output_dim == 0 {
            return Err(Error::invalid("selector output_dim must be >= 1"));
        }
        for g in &self.classifiers {
            if g.points.is_empty() {
                return Err(Error::invalid(format!("classifier grid for {} is empty", g.kind)));
            }
            for p in &g.points {
                if p.kind() != g.kind {
                    return Err(Error::invalid(format!("grid for {} contains a {} spec", g.kind, p.kind())));
                }
                p.validate()?;
            }
        }
        self.features.validate()?;
        self.decompose.eemd.emd.validate()
    }

    pub fn n_cells(&self) -> usize {
        self.decompositions.len() * self.feature_sets.len() * self.selectors.len() * self.classifiers.len()
    }
}

/// Full-set features of every cycle under one decomposition.
#[derive(Debug, Clone)]
pub struct DecomposedFeatures {
    pub decomposition: Decomposition,
    pub matrix: FeatureMatrix,
    pub summary: ExtractionSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionSummary {
    pub decomposition: Decomposition,
    pub rows: usize,
    pub dropped: usize,
    /// Rows kept with at least one silent-filled band.
    pub filled: usize,
}

/// Extract the full feature set once per decomposition; smaller sets are
/// column subsets of it.
pub fn extract_all(cycles: &[CycleRecord], cfg: &MatrixConfig) -> Result<Vec<DecomposedFeatures>> {
    cfg.decompositions
        .iter()
        .map(|&d| {
            log::info!("extracting {} features for {} cycles", d, cycles.len());
            let build = build_feature_matrix(cycles, d, FeatureSet::Full, &cfg.decompose, &cfg.features, cfg.seed)?;
            let dropped = build.issues.iter().filter(|i| i.dropped).count();
            let mut filled: Vec<&str> = build.issues.iter().filter(|i| !i.dropped).map(|i| i.cycle_id.as_str()).collect();
            filled.dedup();
            Ok(DecomposedFeatures {
                decomposition: d,
                summary: ExtractionSummary { decomposition: d, rows: build.matrix.len(), dropped, filled: filled.len() },
                matrix: build.matrix,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    /// Position in enumeration order (decomposition × feature set × selector × classifier).
    pub index: usize,
    pub decomposition: Decomposition,
    pub feature_set: FeatureSet,
    pub selector: SelectorKind,
    pub classifier: ClassifierKind,
    /// Winning grid point.
    pub spec: Option<ClassifierSpec>,
    pub n_features: usize,
    pub folds: Vec<Metrics>,
    pub mean: Option<Metrics>,
    pub grid: Vec<super::pipeline::GridPoint>,
    pub seed: u64,
    pub wall_time_s: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub version: u32,
    pub seed: u64,
    pub folds: usize,
    pub group_by_patient: bool,
    #[serde(default)]
    pub paper_compat_scaling: bool,
    pub extraction: Vec<ExtractionSummary>,
    /// Sorted by mean accuracy, best first; failed cells last.
    pub cells: Vec<CellResult>,
}

struct CellPlan {
    index: usize,
    source: usize,
    feature_set: FeatureSet,
    selector: SelectorKind,
    grid: usize,
}

/// Fold index per row. Depends only on the seed and the rows, so every
/// cell over the same matrix sees the same partition.
pub fn fold_assignment(m: &FeatureMatrix, folds: usize, group_by_patient: bool, seed: u64) -> Result<Vec<usize>> {
    let seed = derive_seed(seed, &[0xf0]);
    if group_by_patient {
        group_kfold(&m.groups, folds, seed)
    } else {
        stratified_kfold(&m.labels, folds, seed)
    }
}

/// Evaluate every cell on pre-extracted features. Folds depend only on the
/// seed, so every cell of a decomposition sees the same partition; model
/// seeds derive from (seed, cell index, fold index).
pub fn evaluate_matrix(sources: &[DecomposedFeatures], cfg: &MatrixConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let mut plans = Vec::new();
    for (source, d) in cfg.decompositions.iter().enumerate() {
        if sources.get(source).map(|s| s.decomposition) != Some(*d) {
            return Err(Error::invalid(format!("missing extracted features for decomposition {d}")));
        }
        for &feature_set in &cfg.feature_sets {
            for &selector in &cfg.selectors {
                for grid in 0..cfg.classifiers.len() {
                    plans.push(CellPlan { index: plans.len(), source, feature_set, selector, grid });
                }
            }
        }
    }
    let folds: Vec<Result<Vec<usize>>> = sources.iter().map(|s| fold_assignment(&s.matrix, cfg.folds, cfg.group_by_patient, cfg.seed)).collect();

    let mut cells: Vec<CellResult> = plans
        .par_iter()
        .map(|p| {
            let started = Instant::now();
            let src = &sources[p.source];
            let grid = &cfg.classifiers[p.grid];
            let seed = derive_seed(cfg.seed, &[p.index as u64]);
            let mut cell = CellResult {
                index: p.index,
                decomposition: src.decomposition,
                feature_set: p.feature_set,
                selector: p.selector,
                classifier: grid.kind,
                spec: None,
                n_features: 0,
                folds: Vec::new(),
                mean: None,
                grid: Vec::new(),
                seed,
                wall_time_s: 0.0,
                error: None,
            };
            let outcome = (|| -> Result<()> {
                let assignment = folds[p.source].as_ref().map_err(|e| Error::invalid(e.to_string()))?;
                let names = feature_names(src.decomposition, p.feature_set, &cfg.decompose, &cfg.features);
                let mut m = src.matrix.select_named(&names)?;
                cell.n_features = m.width();
                if cfg.paper_compat_scaling {
                    m.rows = MinMaxScaler::fit(&m.rows)?.transform(&m.rows);
                }
                let g = grid_search(
                    &m.rows,
                    &m.labels,
                    assignment,
                    cfg.folds,
                    p.selector,
                    &cfg.selector,
                    &grid.points,
                    cfg.paper_compat_scaling,
                    seed,
                )?;
                cell.spec = Some(g.best_spec);
                cell.folds = g.best.folds;
                cell.mean = Some(g.best.mean);
                cell.grid = g.points;
                Ok(())
            })();
            if let Err(e) = outcome {
                log::warn!(
                    "cell {} ({}/{}/{}/{}) failed: {e}",
                    p.index,
                    src.decomposition,
                    p.feature_set,
                    p.selector,
                    grid.kind
                );
                cell.error = Some(e.to_string());
            }
            cell.wall_time_s = started.elapsed().as_secs_f64();
            cell
        })
        .collect();
    cells.sort_by(|a, b| {
        let acc = |c: &CellResult| c.mean.map_or(f64::NEG_INFINITY, |m| m.accuracy);
        acc(b).total_cmp(&acc(a)).then(a.index.cmp(&b.index))
    });
    Ok(EvalReport {
        version: REPORT_FORMAT_VERSION,
        seed: cfg.seed,
        folds: cfg.folds,
        group_by_patient: cfg.group_by_patient,
        paper_compat_scaling: cfg.paper_compat_scaling,
        extraction: sources.iter().map(|s| s.summary.clone()).collect(),
        cells,
    })
}

pub fn run_matrix(cycles: &[CycleRecord], cfg: &MatrixConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let sources = extract_all(cycles, cfg)?;
    evaluate_matrix(&sources, cfg)
}

pub const CSV_HEADER: [&str; 12] = [
    "rank",
    "decomposition",
    "feature_set",
    "selector",
    "classifier",
    "params",
    "n_features",
    "accuracy",
    "precision",
    "recall",
    "f1",
    "error",
];

impl EvalReport {
    pub fn save_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let r: EvalReport = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if r.version != REPORT_FORMAT_VERSION {
            return Err(Error::Format(format!("{}: unsupported report version {}", path.display(), r.version)));
        }
        Ok(r)
    }

    /// One row per cell with the four mean metrics; no timing columns, so
    /// equal runs give byte-identical files.
    pub fn to_csv(&self, top: Option<usize>) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER)?;
        for (rank, c) in self.cells.iter().take(top.unwrap_or(usize::MAX)).enumerate() {
            let m = |f: fn(&Metrics) -> f64| c.mean.as_ref().map_or(String::new(), |x| format!("{:.6}", f(x)));
            w.write_record([
                (rank + 1).to_string(),
                c.decomposition.to_string(),
                c.feature_set.to_string(),
                c.selector.to_string(),
                c.classifier.to_string(),
                c.spec.as_ref().map_or(String::new(), |s| s.params_string()),
                c.n_features.to_string(),
                m(|x| x.accuracy),
                m(|x| x.precision),
                m(|x| x.recall),
                m(|x| x.f1),
                c.error.clone().unwrap_or_default(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn best(&self) -> Option<&CellResult> {
        self.cells.first().filter(|c| c.mean.is_some())
    }

    pub fn find(
        &self,
        d: Decomposition,
        f: FeatureSet,
        s: SelectorKind,
        c: ClassifierKind,
    ) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|x| x.decomposition == d && x.feature_set == f && x.selector == s && x.classifier == c)
    }
}
