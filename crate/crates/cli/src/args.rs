use clap::{ArgAction, Args, Parser, Subcommand};
use std::path::PathBuf;

use auscult_core::classify::ClassifierKind;
use auscult_core::decompose::Decomposition;
use auscult_core::features::FeatureSet;
use auscult_core::select::SelectorKind;
use auscult_core::LabelScheme;

#[derive(Debug, Parser)]
#[command(name = "auscult", version, about = "Lung-sound crackle classification pipeline")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Experiment config (TOML). Flags override its values.
    #[arg(long, global = true, env = "AUSCULT_CONFIG")]
    pub config: Option<PathBuf>,

    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "AUSCULT_WORKERS")]
    pub workers: Option<usize>,

    /// Base seed for every random choice.
    #[arg(long, global = true, env = "AUSCULT_SEED")]
    pub seed: Option<u64>,

    /// Root of all stage outputs.
    #[arg(long, global = true, env = "AUSCULT_OUTPUT_DIR")]
    pub output_dir: Option<PathBuf>,

    /// More log output (repeatable).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,

    /// Only warnings and errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a labelled synthetic corpus (WAV + annotations).
    Synth(SynthArgs),
    /// Slice, preprocess and store labelled cycles.
    Ingest(IngestArgs),
    /// Decompose cycles and write feature matrices.
    Extract(ExtractArgs),
    /// Fit a feature selector on a feature matrix.
    Select(StageArgs),
    /// Fit a scaling → selection → classifier pipeline on all cycles.
    Train(TrainArgs),
    /// Cross-validate a pipeline, or score a trained one.
    Evaluate(EvaluateArgs),
    /// Run the whole experiment matrix end to end.
    Matrix(MatrixArgs),
    /// Render a saved report as the ranked CSV table.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of cycles (even).
    #[arg(long, default_value_t = 200)]
    pub n: usize,

    /// Directory for the generated files.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Default)]
pub struct IngestArgs {
    #[arg(long, env = "AUSCULT_DATA_DIR")]
    pub data_dir: Option<PathBuf>,

    #[arg(long)]
    pub scheme: Option<LabelScheme>,

    #[arg(long)]
    pub target_rate: Option<u32>,

    #[arg(long)]
    pub max_seconds: Option<f64>,

    #[arg(long)]
    pub no_denoise: bool,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Decompositions to extract (repeatable); defaults to the config list, else `none`.
    #[arg(long = "decomposition", short = 'd')]
    pub decompositions: Vec<Decomposition>,

    /// Also write every band as LSC1 files with JSON sidecars.
    #[arg(long)]
    pub dump_bands: Option<PathBuf>,
}

/// Which feature matrix and selector a command works on.
#[derive(Debug, Args, Clone)]
pub struct StageArgs {
    #[arg(long, short = 'd', default_value = "none")]
    pub decomposition: Decomposition,

    #[arg(long, short = 'f', default_value = "full")]
    pub feature_set: FeatureSet,

    #[arg(long, short = 's', default_value = "none")]
    pub selector: SelectorKind,

    /// Selector output width; defaults to the config value (30).
    #[arg(long)]
    pub output_dim: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ClassifierArgs {
    #[arg(long, short = 'c', default_value = "knn")]
    pub classifier: ClassifierKind,

    /// JSON object overriding the classifier defaults, e.g. '{"n_neighbors":1,"p":1}'.
    #[arg(long)]
    pub params: Option<String>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub stage: StageArgs,

    #[command(flatten)]
    pub classifier: ClassifierArgs,

    /// Model file; defaults to `<output-dir>/models/<stage>_<classifier>.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub stage: StageArgs,

    #[command(flatten)]
    pub classifier: ClassifierArgs,

    /// Score this trained model on the current features instead of cross-validating.
    #[arg(long)]
    pub model: Option<PathBuf>,

    #[command(flatten)]
    pub cv: CvArgs,
}

#[derive(Debug, Args, Default)]
pub struct CvArgs {
    #[arg(long)]
    pub folds: Option<usize>,

    /// Keep each patient's cycles in one fold.
    #[arg(long)]
    pub group_by_patient: bool,

    /// Fit scaling once on all rows before splitting (leaks test statistics into training).
    #[arg(long)]
    pub paper_compat_scaling: bool,
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    #[arg(long, env = "AUSCULT_DATA_DIR")]
    pub data_dir: Option<PathBuf>,

    #[command(flatten)]
    pub cv: CvArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Report JSON; defaults to `<output-dir>/report.json`.
    #[arg(long)]
    pub report: Option<PathBuf>,

    /// Only the N best cells.
    #[arg(long)]
    pub top: Option<usize>,

    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
