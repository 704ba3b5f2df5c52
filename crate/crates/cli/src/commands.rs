//! Command implementations. Workers compute in parallel; every file is
//! written from the calling thread once its inputs are ready.

use serde::{Deserialize, Serialize};
use serde_json::json;
use std::fs;
use std::path::{Path, PathBuf};

use auscult_core::classify::ClassifierSpec;
use auscult_core::decompose::{decompose, dump_bands, Decomposition};
use auscult_core::eval::{
    compute_metrics, cross_validate, evaluate_matrix, extract_all, fit_pipeline, fold_assignment,
    DecomposedFeatures, EvalReport, ExtractionSummary, FittedPipeline, MatrixConfig, PipelineSpec,
};
use auscult_core::features::{cycle_seed, feature_names, FeatureMatrix, FeatureSet, MinMaxScaler};
use auscult_core::ingest::store::{read_cycle_store, write_cycle_store, MANIFEST_FILE};
use auscult_core::ingest::{list_recordings, load_corpus, IngestIssue};
use auscult_core::rng::derive_seed;
use auscult_core::select::{fit_selector, SelectorConfig, SelectorModel, SelectorParams};
use auscult_core::synth::make_synthetic_corpus;
use auscult_core::{Error, LabelScheme};

use crate::args::{
    ClassifierArgs, Cli, Command, CvArgs, EvaluateArgs, ExtractArgs, IngestArgs, MatrixArgs, ReportArgs,
    StageArgs, SynthArgs, TrainArgs,
};
use crate::cache::{clear_stamp, is_fresh, read_stamp, write_stamp, StampBuilder};
use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

pub const MODEL_ARTIFACT_VERSION: u32 = 1;

/// Config file values with global flag overrides applied.
#[derive(Debug, Clone)]
pub struct Context {
    pub cfg: ExperimentConfig,
    pub has_config_file: bool,
}

impl Context {
    pub fn new(cli: &Cli) -> CliResult<Self> {
        let g = &cli.global;
        let mut cfg = match &g.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::from_toml("")?,
        };
        if let Some(s) = g.seed {
            cfg.seed = Some(s);
        }
        if let Some(w) = g.workers {
            cfg.workers = w;
        }
        if let Some(o) = &g.output_dir {
            cfg.output_dir = o.clone();
        }
        Ok(Context { cfg, has_config_file: g.config.is_some() })
    }

    pub fn cycles_dir(&self) -> PathBuf {
        self.cfg.output_dir.join("cycles")
    }

    pub fn features_path(&self, d: Decomposition) -> PathBuf {
        self.cfg.output_dir.join("features").join(format!("{d}.csv"))
    }

    pub fn report_path(&self) -> PathBuf {
        self.cfg.output_dir.join("report.json")
    }

    fn seed(&self) -> CliResult<u64> {
        Ok(self.cfg.seed()?)
    }

    fn apply_cv(&mut self, cv: &CvArgs) {
        if let Some(k) = cv.folds {
            self.cfg.folds = k;
        }
        self.cfg.group_by_patient |= cv.group_by_patient;
        self.cfg.paper_compat_scaling |= cv.paper_compat_scaling;
    }
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| {
        CliError::Config(format!("cannot create output directory {}: {e} (choose another with --output-dir)", dir.display()))
    })
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    fs::write(path, bytes).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn missing(what: String) -> CliError {
    CliError::Core(Error::Format(what))
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    let ctx = Context::new(cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.cfg.workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} workers: {e}", ctx.cfg.workers)))?;
    pool.install(|| match &cli.command {
        Command::Synth(a) => synth(&ctx, a),
        Command::Ingest(a) => ingest(ctx.clone(), a),
        Command::Extract(a) => extract(&ctx, a),
        Command::Select(a) => select(&ctx, a),
        Command::Train(a) => train(&ctx, a),
        Command::Evaluate(a) => evaluate(ctx.clone(), a),
        Command::Matrix(a) => matrix(ctx.clone(), a),
        Command::Report(a) => report(&ctx, a),
    })
}

fn synth(ctx: &Context, a: &SynthArgs) -> CliResult<()> {
    let seed = ctx.seed()?;
    ensure_dir(&a.out)?;
    let s = make_synthetic_corpus(a.n, seed, &a.out)?;
    println!(
        "wrote {} cycles ({} crackle, {} with wheeze) in {} recordings to {}",
        s.cycles,
        s.crackle_cycles,
        s.wheeze_cycles,
        s.recordings,
        a.out.display()
    );
    Ok(())
}

/// What the ingest stage produced; persisted next to the cycle store.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestSummary {
    pub scheme: LabelScheme,
    pub recordings: usize,
    pub cycles: usize,
    pub crackle_cycles: usize,
    pub issues: Vec<IngestIssue>,
    #[serde(skip)]
    pub cached: bool,
}

/// Ingest `cfg.data_dir` into the cycle store unless the store is already
/// current for these files and settings.
pub fn ingest_stage(ctx: &Context) -> CliResult<IngestSummary> {
    let data_dir = ctx
        .cfg
        .data_dir
        .clone()
        .ok_or_else(|| CliError::Config("no data directory: pass --data-dir or set data_dir in the config".into()))?;
    let p = &ctx.cfg.preprocess;
    if p.target_rate == 0 || !(p.max_seconds > 0.0 && p.max_seconds.is_finite()) {
        return Err(CliError::Config("target rate and max seconds must be positive".into()));
    }
    let wavs = list_recordings(&data_dir)?;
    if wavs.is_empty() {
        return Err(missing(format!("no .wav recordings in {}", data_dir.display())));
    }
    let mut kb = StampBuilder::new("ingest");
    kb.json(&ctx.cfg.scheme)?.json(p)?;
    for w in &wavs {
        kb.file(w)?;
        let txt = w.with_extension("txt");
        if txt.exists() {
            kb.file(&txt)?;
        }
    }
    let key = kb.finish();

    let dir = ctx.cycles_dir();
    let manifest = dir.join(MANIFEST_FILE);
    let summary_path = dir.join("summary.json");
    if is_fresh(&manifest, &key) {
        if let Some(mut s) = fs::read(&summary_path).ok().and_then(|b| serde_json::from_slice::<IngestSummary>(&b).ok()) {
            s.cached = true;
            return Ok(s);
        }
    }

    let corpus = load_corpus(&data_dir, ctx.cfg.scheme, p)?;
    ensure_dir(&dir)?;
    clear_stamp(&manifest)?;
    for entry in fs::read_dir(&dir).map_err(Error::from)?.flatten() {
        if entry.path().extension().is_some_and(|e| e == "lsc") {
            fs::remove_file(entry.path()).map_err(Error::from)?;
        }
    }
    write_cycle_store(&dir, &corpus.cycles)?;
    let summary = IngestSummary {
        scheme: ctx.cfg.scheme,
        recordings: wavs.len(),
        cycles: corpus.cycles.len(),
        crackle_cycles: corpus.cycles.iter().filter(|c| c.label.is_positive()).count(),
        issues: corpus.issues,
        cached: false,
    };
    write_file(&summary_path, serde_json::to_vec_pretty(&summary).map_err(Error::from)?)?;
    write_stamp(&manifest, &key)?;
    Ok(summary)
}

fn ingest(mut ctx: Context, a: &IngestArgs) -> CliResult<()> {
    if let Some(d) = &a.data_dir {
        ctx.cfg.data_dir = Some(d.clone());
    }
    if let Some(s) = a.scheme {
        ctx.cfg.scheme = s;
    }
    if let Some(r) = a.target_rate {
        ctx.cfg.preprocess.target_rate = r;
    }
    if let Some(m) = a.max_seconds {
        ctx.cfg.preprocess.max_seconds = m;
    }
    if a.no_denoise {
        ctx.cfg.preprocess.denoise = false;
    }
    let s = ingest_stage(&ctx)?;
    println!(
        "{} cycles ({} crackle) from {} recordings under the {} scheme, {} issues{} -> {}",
        s.cycles,
        s.crackle_cycles,
        s.recordings,
        s.scheme.as_str(),
        s.issues.len(),
        if s.cached { " (up to date)" } else { "" },
        ctx.cycles_dir().display()
    );
    Ok(())
}

/// Full-set feature matrices for `decomps`, extracted from the cycle store
/// or reloaded when their stamps are current. Fresh results are read back
/// from disk so cached and uncached runs see identical values.
pub fn features_stage(ctx: &Context, decomps: &[Decomposition]) -> CliResult<Vec<DecomposedFeatures>> {
    let seed = ctx.seed()?;
    let manifest = ctx.cycles_dir().join(MANIFEST_FILE);
    let cycle_key = read_stamp(&manifest)
        .filter(|_| manifest.exists())
        .ok_or_else(|| missing(format!("no cycle store at {}; run `auscult ingest` first", ctx.cycles_dir().display())))?;
    let mut cycles = None;
    let mut out = Vec::new();
    for &d in decomps {
        let path = ctx.features_path(d);
        let mut kb = StampBuilder::new("extract");
        kb.bytes(cycle_key.as_bytes()).json(&d)?.json(&ctx.cfg.decompose)?.json(&ctx.cfg.features)?.json(&seed)?;
        let key = kb.finish();
        if !is_fresh(&path, &key) {
            if cycles.is_none() {
                cycles = Some(read_cycle_store(&ctx.cycles_dir())?);
            }
            let mcfg = MatrixConfig {
                decompositions: vec![d],
                seed,
                decompose: ctx.cfg.decompose.clone(),
                features: ctx.cfg.features.clone(),
                ..Default::default()
            };
            let built = extract_all(cycles.as_deref().unwrap_or_default(), &mcfg)?.remove(0);
            if let Some(dir) = path.parent() {
                ensure_dir(dir)?;
            }
            clear_stamp(&path)?;
            built.matrix.save(&path, json!({ "decomposition": d, "seed": seed, "summary": built.summary }))?;
            write_stamp(&path, &key)?;
        } else {
            log::info!("{d}: features up to date");
        }
        let (matrix, meta) = FeatureMatrix::load(&path)?;
        let summary: ExtractionSummary = serde_json::from_value(meta["summary"].clone()).map_err(Error::from)?;
        out.push(DecomposedFeatures { decomposition: d, matrix, summary });
    }
    Ok(out)
}

fn extract(ctx: &Context, a: &ExtractArgs) -> CliResult<()> {
    let decomps = if !a.decompositions.is_empty() {
        a.decompositions.clone()
    } else if !ctx.cfg.decompositions.is_empty() {
        ctx.cfg.decompositions.clone()
    } else {
        vec![Decomposition::None]
    };
    for f in features_stage(ctx, &decomps)? {
        println!(
            "{}: {} rows x {} features ({} dropped, {} with filled bands) -> {}",
            f.decomposition,
            f.matrix.len(),
            f.matrix.width(),
            f.summary.dropped,
            f.summary.filled,
            ctx.features_path(f.decomposition).display()
        );
    }
    if let Some(dir) = &a.dump_bands {
        let seed = ctx.seed()?;
        let cycles = read_cycle_store(&ctx.cycles_dir())?;
        for &d in &decomps {
            let sub = dir.join(d.as_str());
            ensure_dir(&sub)?;
            for c in &cycles {
                match decompose(&c.samples, c.sample_rate_hz as f64, d, &ctx.cfg.decompose, cycle_seed(seed, &c.id)) {
                    Ok(set) => dump_bands(&sub, &c.id, &set)?,
                    Err(e) => log::warn!("{}: {d} failed: {e}", c.id),
                }
            }
        }
        println!("bands written under {}", dir.display());
    }
    Ok(())
}

/// The feature matrix `stage` names, restricted to its feature set.
fn stage_matrix(ctx: &Context, stage: &StageArgs) -> CliResult<FeatureMatrix> {
    let path = ctx.features_path(stage.decomposition);
    if !path.exists() {
        return Err(missing(format!(
            "no features at {}; run `auscult extract -d {}` first",
            path.display(),
            stage.decomposition
        )));
    }
    let (m, _) = FeatureMatrix::load(&path)?;
    let names = feature_names(stage.decomposition, stage.feature_set, &ctx.cfg.decompose, &ctx.cfg.features);
    Ok(m.select_named(&names)?)
}

fn selector_cfg(ctx: &Context, stage: &StageArgs) -> CliResult<SelectorConfig> {
    let mut c = ctx.cfg.selector.clone();
    if let Some(k) = stage.output_dim {
        c.output_dim = k;
    }
    if c.output_dim == 0 {
        return Err(CliError::Config("--output-dim must be at least 1".into()));
    }
    Ok(c)
}

fn stage_tag(stage: &StageArgs) -> String {
    format!("{}_{}_{}", stage.decomposition, stage.feature_set, stage.selector)
}

/// Scaling and selector fitted on every row of one feature matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectorArtifact {
    pub decomposition: Decomposition,
    pub feature_set: FeatureSet,
    pub input_features: Vec<String>,
    pub output_features: Vec<String>,
    pub scaler: MinMaxScaler,
    pub selector: SelectorModel,
}

fn select(ctx: &Context, stage: &StageArgs) -> CliResult<()> {
    let seed = ctx.seed()?;
    let cfg = selector_cfg(ctx, stage)?;
    let m = stage_matrix(ctx, stage)?;
    let scaler = MinMaxScaler::fit(&m.rows)?;
    let scaled = scaler.transform(&m.rows);
    let sel = fit_selector(stage.selector, &scaled, &m.labels, &cfg, derive_seed(seed, &[1]))?;
    let reduced = sel.transform(&scaled)?;
    let output_features: Vec<String> = match &sel.params {
        SelectorParams::None => m.feature_names.clone(),
        SelectorParams::Chi2 { indices, .. } => indices.iter().map(|&i| m.feature_names[i].clone()).collect(),
        _ => (1..=sel.output_dim).map(|i| format!("{}_{i}", stage.selector)).collect(),
    };
    let mut out = FeatureMatrix::empty(output_features.clone());
    for (i, row) in reduced.into_iter().enumerate() {
        out.push_row(m.cycle_ids[i].clone(), m.groups[i].clone(), row, m.labels[i])?;
    }
    let dir = ctx.cfg.output_dir.join("selectors");
    ensure_dir(&dir)?;
    let tag = stage_tag(stage);
    let model_path = dir.join(format!("{tag}.selector.json"));
    let csv_path = dir.join(format!("{tag}.csv"));
    let artifact = SelectorArtifact {
        decomposition: stage.decomposition,
        feature_set: stage.feature_set,
        input_features: m.feature_names.clone(),
        output_features,
        scaler,
        selector: sel,
    };
    write_file(&model_path, serde_json::to_vec_pretty(&artifact).map_err(Error::from)?)?;
    out.save(&csv_path, json!({ "selector": model_path.file_name().map(|n| n.to_string_lossy()) }))?;
    println!(
        "{}: {} -> {} features; selector {}, reduced features {}",
        stage.selector,
        m.width(),
        out.width(),
        model_path.display(),
        csv_path.display()
    );
    Ok(())
}

/// A classifier spec from its kind defaults plus `--params` overrides.
/// Unknown keys are rejected rather than silently ignored.
pub fn classifier_spec(a: &ClassifierArgs) -> CliResult<ClassifierSpec> {
    let kind = a.classifier;
    let mut base = serde_json::to_value(kind.default_spec()).map_err(Error::from)?;
    if let Some(text) = &a.params {
        let over: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("--params is not valid JSON: {e}")))?;
        let over = over.as_object().ok_or_else(|| CliError::Config("--params must be a JSON object".into()))?;
        let base = base.as_object_mut().expect("specs serialize as objects");
        let known: Vec<String> = base.keys().filter(|k| *k != "kind" && *k != "seed").cloned().collect();
        for (k, v) in over {
            if !known.contains(k) {
                return Err(CliError::Config(format!(
                    "unknown {kind} parameter `{k}` (expected one of: {}; the seed comes from --seed)",
                    known.join(", ")
                )));
            }
            base.insert(k.clone(), v.clone());
        }
    }
    let spec: ClassifierSpec =
        serde_json::from_value(base).map_err(|e| CliError::Config(format!("--params for {kind}: {e}")))?;
    spec.validate()?;
    Ok(spec)
}

/// A fitted pipeline plus what is needed to rebuild its input columns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub version: u32,
    pub decomposition: Decomposition,
    pub feature_set: FeatureSet,
    pub feature_names: Vec<String>,
    pub spec: PipelineSpec,
    pub pipeline: FittedPipeline,
}

fn train(ctx: &Context, a: &TrainArgs) -> CliResult<()> {
    let seed = ctx.seed()?;
    let spec = PipelineSpec {
        selector: a.stage.selector,
        selector_cfg: selector_cfg(ctx, &a.stage)?,
        classifier: classifier_spec(&a.classifier)?,
        global_scaling: false,
    };
    let m = stage_matrix(ctx, &a.stage)?;
    let pipeline = fit_pipeline(&m.rows, &m.labels, &spec, seed)?;
    let path = a.out.clone().unwrap_or_else(|| {
        ctx.cfg
            .output_dir
            .join("models")
            .join(format!("{}_{}.json", stage_tag(&a.stage), a.classifier.classifier))
    });
    let artifact = ModelArtifact {
        version: MODEL_ARTIFACT_VERSION,
        decomposition: a.stage.decomposition,
        feature_set: a.stage.feature_set,
        feature_names: m.feature_names.clone(),
        spec,
        pipeline,
    };
    write_file(&path, serde_json::to_vec(&artifact).map_err(Error::from)?)?;
    println!("trained {} on {} cycles x {} features -> {}", a.classifier.classifier, m.len(), m.width(), path.display());
    Ok(())
}

fn evaluate(mut ctx: Context, a: &EvaluateArgs) -> CliResult<()> {
    if let Some(model) = &a.model {
        let text = fs::read_to_string(model)
            .map_err(|e| missing(format!("cannot read model {}: {e}", model.display())))?;
        let art: ModelArtifact = serde_json::from_str(&text).map_err(Error::from)?;
        if art.version != MODEL_ARTIFACT_VERSION {
            return Err(missing(format!("{}: unsupported model version {}", model.display(), art.version)));
        }
        let stage = StageArgs {
            decomposition: art.decomposition,
            feature_set: art.feature_set,
            selector: art.spec.selector,
            output_dim: None,
        };
        let path = ctx.features_path(stage.decomposition);
        if !path.exists() {
            return Err(missing(format!("no features at {}; run `auscult extract -d {}` first", path.display(), stage.decomposition)));
        }
        let m = FeatureMatrix::load(&path)?.0.select_named(&art.feature_names)?;
        let predicted = art.pipeline.predict(&m.rows)?;
        let metrics = compute_metrics(&m.labels, &predicted)?;
        let out = json!({ "model": model, "cycles": m.len(), "metrics": metrics });
        println!("{}", serde_json::to_string_pretty(&out).map_err(Error::from)?);
        return Ok(());
    }
    ctx.apply_cv(&a.cv);
    let seed = ctx.seed()?;
    let spec = PipelineSpec {
        selector: a.stage.selector,
        selector_cfg: selector_cfg(&ctx, &a.stage)?,
        classifier: classifier_spec(&a.classifier)?,
        global_scaling: ctx.cfg.paper_compat_scaling,
    };
    if ctx.cfg.folds < 2 {
        return Err(CliError::Config("--folds must be at least 2".into()));
    }
    let mut m = stage_matrix(&ctx, &a.stage)?;
    let assignment = fold_assignment(&m, ctx.cfg.folds, ctx.cfg.group_by_patient, seed)?;
    if ctx.cfg.paper_compat_scaling {
        m.rows = MinMaxScaler::fit(&m.rows)?.transform(&m.rows);
    }
    let cv = cross_validate(&m.rows, &m.labels, &assignment, ctx.cfg.folds, &spec, seed)?;
    let out = json!({
        "decomposition": a.stage.decomposition,
        "feature_set": a.stage.feature_set,
        "selector": a.stage.selector,
        "classifier": spec.classifier,
        "n_features": m.width(),
        "group_by_patient": ctx.cfg.group_by_patient,
        "paper_compat_scaling": ctx.cfg.paper_compat_scaling,
        "folds": cv.folds,
        "mean": cv.mean,
    });
    println!("{}", serde_json::to_string_pretty(&out).map_err(Error::from)?);
    Ok(())
}

/// Ingest, extract and evaluate every cell; writes `report.json` and `report.csv`.
pub fn matrix_stage(ctx: &Context) -> CliResult<EvalReport> {
    let mcfg = ctx.cfg.matrix_config()?;
    let ing = ingest_stage(ctx)?;
    log::info!(
        "{} cycles ({} crackle){}",
        ing.cycles,
        ing.crackle_cycles,
        if ing.cached { ", cycle store up to date" } else { "" }
    );
    let sources = features_stage(ctx, &mcfg.decompositions)?;
    log::info!("evaluating {} cells", mcfg.n_cells());
    let report = evaluate_matrix(&sources, &mcfg)?;
    let out = &ctx.cfg.output_dir;
    write_file(&out.join("report.json"), serde_json::to_vec_pretty(&report).map_err(Error::from)?)?;
    write_file(&out.join("report.csv"), report.to_csv(None)?)?;
    Ok(report)
}

fn matrix(mut ctx: Context, a: &MatrixArgs) -> CliResult<()> {
    if !ctx.has_config_file {
        return Err(CliError::Config("matrix needs an experiment config: pass --config <file.toml>".into()));
    }
    if let Some(d) = &a.data_dir {
        ctx.cfg.data_dir = Some(d.clone());
    }
    ctx.apply_cv(&a.cv);
    let report = matrix_stage(&ctx)?;
    let failed = report.cells.iter().filter(|c| c.error.is_some()).count();
    println!("{} cells evaluated, {failed} failed", report.cells.len());
    if let Some(b) = report.best() {
        println!(
            "best: {}/{}/{}/{} accuracy {:.4}",
            b.decomposition,
            b.feature_set,
            b.selector,
            b.classifier,
            b.mean.map_or(0.0, |m| m.accuracy)
        );
    }
    println!("report -> {}", ctx.cfg.output_dir.join("report.csv").display());
    Ok(())
}

fn report(ctx: &Context, a: &ReportArgs) -> CliResult<()> {
    let path = a.report.clone().unwrap_or_else(|| ctx.report_path());
    if !path.exists() {
        return Err(missing(format!("no report at {}; run `auscult matrix` first", path.display())));
    }
    let csv = EvalReport::load_json(&path)?.to_csv(a.top)?;
    match &a.out {
        Some(p) => write_file(p, csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}
