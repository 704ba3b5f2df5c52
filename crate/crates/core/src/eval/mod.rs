//! Metrics, cross-validation, grid search and the experiment matrix.

pub mod experiment;
pub mod folds;
pub mod metrics;
pub mod pipeline;

pub use experiment::{
    evaluate_matrix, extract_all, fold_assignment, run_matrix, CellResult, ClassifierGrid, DecomposedFeatures, EvalReport,
    ExtractionSummary, MatrixConfig,
};
pub use folds::{group_kfold, split, stratified_kfold};
pub use metrics::{compute_metrics, Confusion, Metrics};
pub use pipeline::{
    cross_validate, fit_fold, fit_pipeline, grid_search, CvResult, FittedPipeline, GridPoint, GridSearch,
    PipelineSpec,
};
