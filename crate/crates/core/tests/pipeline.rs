//! Library-level runs across stages on a generated corpus.

use auscult_core::classify::{ClassifierKind, ClassifierSpec, KnnSpec, RfSpec};
use auscult_core::decompose::Decomposition;
use auscult_core::eval::{
    fit_pipeline, fold_assignment, run_matrix, split, ClassifierGrid, FittedPipeline, MatrixConfig, PipelineSpec,
};
use auscult_core::features::{build_feature_matrix, feature_names, FeatureConfig, FeatureMatrix, FeatureSet};
use auscult_core::ingest::store::{read_cycle_store, write_cycle_store};
use auscult_core::ingest::{clip_to_max, load_corpus, CycleRecord, PreprocessConfig};
use auscult_core::select::{SelectorConfig, SelectorKind};
use auscult_core::synth::make_synthetic_corpus;
use auscult_core::LabelScheme;

fn corpus(n: usize, seed: u64) -> Vec<CycleRecord> {
    let dir = tempfile::tempdir().unwrap();
    make_synthetic_corpus(n, seed, dir.path()).unwrap();
    let c = load_corpus(dir.path(), LabelScheme::General, &PreprocessConfig::default()).unwrap();
    assert!(c.issues.is_empty(), "{:?}", c.issues);
    c.cycles
}

#[test]
fn ingested_cycles_respect_preprocessing_contract() {
    let cycles = corpus(24, 1);
    assert_eq!(cycles.len(), 24);
    for c in &cycles {
        assert_eq!(c.sample_rate_hz, 8000);
        assert!(c.duration_s() <= 5.0);
        let peak = c.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((peak - 1.0).abs() < 1e-12, "{}: peak {peak}", c.id);
        let once = clip_to_max(c.clone(), 1.0);
        assert_eq!(clip_to_max(once.clone(), 1.0), once);
    }
}

#[test]
fn cycle_store_round_trip_keeps_features_close() {
    let cycles = corpus(8, 2);
    let dir = tempfile::tempdir().unwrap();
    write_cycle_store(dir.path(), &cycles).unwrap();
    let back = read_cycle_store(dir.path()).unwrap();
    assert_eq!(back.len(), cycles.len());
    for (a, b) in cycles.iter().zip(&back) {
        assert_eq!((&a.id, a.label, &a.meta), (&b.id, b.label, &b.meta));
        // stored as f32
        assert!(a.samples.iter().zip(&b.samples).all(|(x, y)| (x - y).abs() <= 1e-7));
    }
}

#[test]
fn feature_names_do_not_depend_on_the_corpus() {
    let fcfg = FeatureConfig::default();
    for d in [Decomposition::None, Decomposition::Dwt, Decomposition::Emd] {
        let a = build_feature_matrix(&corpus(4, 3), d, FeatureSet::Full, &Default::default(), &fcfg, 0).unwrap();
        let b = build_feature_matrix(&corpus(6, 4), d, FeatureSet::Full, &Default::default(), &fcfg, 9).unwrap();
        assert_eq!(a.matrix.feature_names, b.matrix.feature_names);
        assert_eq!(a.matrix.feature_names, feature_names(d, FeatureSet::Full, &Default::default(), &fcfg));
    }
}

#[test]
fn saved_feature_matrix_reloads_exactly() {
    let m = build_feature_matrix(&corpus(6, 5), Decomposition::Dwt, FeatureSet::Full, &Default::default(), &Default::default(), 1)
        .unwrap()
        .matrix;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dwt.csv");
    m.save(&path, serde_json::json!({ "note": "x" })).unwrap();
    let (back, meta) = FeatureMatrix::load(&path).unwrap();
    assert_eq!(back, m);
    assert_eq!(meta["note"], "x");
}

#[test]
fn fitted_pipeline_predicts_identically_after_reload() {
    let m = build_feature_matrix(&corpus(20, 6), Decomposition::None, FeatureSet::Full, &Default::default(), &Default::default(), 0)
        .unwrap()
        .matrix;
    let a = fold_assignment(&m, 5, false, 2).unwrap();
    let (train, test) = split(&a, 0);
    let rows = |idx: &[usize]| idx.iter().map(|&i| m.rows[i].clone()).collect::<Vec<_>>();
    let labels: Vec<_> = train.iter().map(|&i| m.labels[i]).collect();
    for selector in [SelectorKind::Chi2, SelectorKind::Pca, SelectorKind::Autoencoder] {
        let spec = PipelineSpec {
            selector,
            selector_cfg: SelectorConfig { output_dim: 4, ..Default::default() },
            classifier: ClassifierSpec::Rf(RfSpec { n_estimators: 5, ..Default::default() }),
            global_scaling: false,
        };
        let p = fit_pipeline(&rows(&train), &labels, &spec, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        p.save(&path).unwrap();
        let back = FittedPipeline::load(&path).unwrap();
        assert_eq!(back.predict(&rows(&test)).unwrap(), p.predict(&rows(&test)).unwrap());
    }
}

#[test]
fn matrix_is_deterministic_and_complete() {
    let cycles = corpus(20, 7);
    let cfg = MatrixConfig {
        decompositions: vec![Decomposition::None, Decomposition::Eemd],
        feature_sets: vec![FeatureSet::Simple, FeatureSet::Full],
        selectors: vec![SelectorKind::None, SelectorKind::Pca],
        selector: SelectorConfig { output_dim: 3, ..Default::default() },
        classifiers: vec![
            ClassifierGrid::single(ClassifierSpec::Knn(KnnSpec { n_neighbors: 1, p: 1.0, leaf_size: 1 })),
            ClassifierGrid::single(ClassifierKind::Kmeans.default_spec()),
        ],
        seed: 12,
        ..Default::default()
    };
    let a = run_matrix(&cycles, &cfg).unwrap();
    let b = run_matrix(&cycles, &cfg).unwrap();
    assert_eq!(a.cells.len(), 16);
    assert!(a.cells.iter().all(|c| c.error.is_none() && c.folds.len() == 5));
    assert_eq!(a.to_csv(None).unwrap(), b.to_csv(None).unwrap());
    let strip = |r: &auscult_core::eval::EvalReport| {
        r.cells.iter().map(|c| (c.index, c.mean, c.folds.clone())).collect::<Vec<_>>()
    };
    assert_eq!(strip(&a), strip(&b));
}
