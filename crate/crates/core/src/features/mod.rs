//! Feature extraction per band and feature-matrix assembly.

pub mod matrix;
pub mod mfcc;
pub mod spectral;
pub mod stats;
pub mod stft;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub use matrix::{minmax_apply, minmax_fit, FeatureMatrix, MinMaxScaler};
pub use mfcc::{mel_scale, mfcc, MfccConfig};
pub use spectral::{spectral_features, SpectralConfig};
pub use stats::{hos_features, simple_stats};
pub use stft::StftConfig;

use crate::decompose::{decompose, BandTag, DecomposeConfig, Decomposition};
use crate::error::{Error, Result};
use crate::ingest::CycleRecord;
use crate::rng::derive_seed;

/// Named feature values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct FeatureVector {
    pub names: Vec<String>,
    pub values: Vec<f64>,
    /// Degenerate-input conventions that were applied.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl FeatureVector {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>, values: Vec<f64>) -> Self {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        debug_assert_eq!(names.len(), values.len());
        FeatureVector { names, values, flags: Vec::new() }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn extend(&mut self, other: FeatureVector) {
        self.names.extend(other.names);
        self.values.extend(other.values);
        self.flags.extend(other.flags);
    }

    pub fn prefixed(mut self, prefix: &str) -> Self {
        for n in &mut self.names {
            *n = format!("{prefix}.{n}");
        }
        self
    }
}

/// Per-frame feature values; rows are frames.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMatrix {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Frames whose spectrum was all zero.
    pub degenerate_frames: usize,
}

pub const AGGREGATE_STATS: [&str; 6] = ["mean", "std", "skewness", "max", "median", "min"];

/// Summarise each column over frames with mean, std, skewness, max, median
/// and min, giving a width independent of the number of frames.
pub fn aggregate_frames(m: &FrameMatrix) -> Result<FeatureVector> {
    if m.rows.is_empty() {
        return Err(Error::invalid("cannot aggregate zero frames"));
    }
    let mut names = Vec::with_capacity(6 * m.columns.len());
    let mut values = Vec::with_capacity(6 * m.columns.len());
    for (j, col) in m.columns.iter().enumerate() {
        let v: Vec<f64> = m.rows.iter().map(|r| r[j]).collect();
        let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        let stats = [stats::mean(&v), stats::std_pop(&v), stats::skewness(&v), hi, stats::median(&v), lo];
        for (s, val) in AGGREGATE_STATS.iter().zip(stats) {
            names.push(format!("{col}.{s}"));
            values.push(val);
        }
    }
    let mut fv = FeatureVector::new(names, values);
    if m.degenerate_frames > 0 {
        fv.flags.push(format!("{} silent frames", m.degenerate_frames));
    }
    Ok(fv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSet {
    Simple,
    HosSpectral,
    Full,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 3] = [FeatureSet::Simple, FeatureSet::HosSpectral, FeatureSet::Full];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSet::Simple => "simple",
            FeatureSet::HosSpectral => "hos_spectral",
            FeatureSet::Full => "full",
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureSet::ALL.into_iter().find(|f| f.as_str() == s).ok_or_else(|| {
            Error::invalid(format!("unknown feature set `{s}` (expected simple|hos_spectral|full)"))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct FeatureConfig {
    pub stft: StftConfig,
    pub spectral: SpectralConfig,
    pub mfcc: MfccConfig,
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        self.stft.validate()?;
        self.spectral.validate()?;
        if self.mfcc.n_mfcc == 0 || self.mfcc.n_mfcc > self.mfcc.n_mels {
            return Err(Error::invalid("n_mfcc must be in 1..=n_mels"));
        }
        Ok(())
    }
}

/// Features of one band, unprefixed. MFCCs are added only for `Full` when
/// `with_mfcc` is set.
pub fn band_features(
    samples: &[f64],
    rate_hz: f64,
    set: FeatureSet,
    with_mfcc: bool,
    cfg: &FeatureConfig,
) -> Result<FeatureVector> {
    let mut fv = simple_stats(samples)?;
    if set == FeatureSet::Simple {
        return Ok(fv);
    }
    fv.extend(hos_features(samples)?);
    fv.extend(aggregate_frames(&spectral_features(samples, &cfg.stft, &cfg.spectral, rate_hz)?)?);
    if set == FeatureSet::Full && with_mfcc {
        fv.extend(aggregate_frames(&mfcc(samples, &cfg.stft, &cfg.mfcc, rate_hz)?)?);
    }
    Ok(fv)
}

/// Bands every cycle is expected to produce for `method`, in column order.
pub fn band_layout(method: Decomposition, cfg: &DecomposeConfig) -> Vec<BandTag> {
    let keep = cfg.eemd.emd.keep_modes;
    match method {
        Decomposition::None => vec![BandTag::Raw],
        Decomposition::Emd | Decomposition::Eemd => (1..=keep).map(|index| BandTag::Imf { index }).collect(),
        Decomposition::Dwt => (1..=cfg.dwt.keep_detail_levels).map(|level| BandTag::Dwt { level }).collect(),
        Decomposition::EmdDwt | Decomposition::EemdDwt => (1..=keep)
            .flat_map(|imf| (1..=cfg.chain_dwt.0.keep_detail_levels).map(move |level| BandTag::ImfDwt { imf, level }))
            .collect(),
    }
}

fn tag_rate(tag: BandTag, source_rate: f64) -> f64 {
    match tag {
        BandTag::Raw | BandTag::Imf { .. } => source_rate,
        BandTag::Dwt { level } | BandTag::ImfDwt { level, .. } => source_rate / 2f64.powi(level as i32),
    }
}

/// Column names for (decomposition, feature set); independent of the data.
pub fn feature_names(method: Decomposition, set: FeatureSet, dcfg: &DecomposeConfig, fcfg: &FeatureConfig) -> Vec<String> {
    let probe = vec![0.0; fcfg.stft.frame_len];
    let per_band = band_features(&probe, 8000.0, set, !method.is_chained(), fcfg)
        .expect("zero probe band is valid")
        .names;
    band_layout(method, dcfg)
        .into_iter()
        .flat_map(|tag| {
            let prefix = tag.name();
            per_band.iter().map(move |n| format!("{prefix}.{n}"))
        })
        .collect()
}

/// Stable per-cycle seed so a cycle's EEMD noise does not depend on which
/// other cycles are in the corpus.
pub fn cycle_seed(base: u64, cycle_id: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in cycle_id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    derive_seed(base, &[h])
}

/// Decompose one cycle and extract its feature row in layout order. Missing
/// bands are filled with the features of a silent band and reported.
pub fn cycle_features(
    cycle: &CycleRecord,
    method: Decomposition,
    set: FeatureSet,
    dcfg: &DecomposeConfig,
    fcfg: &FeatureConfig,
    seed: u64,
) -> Result<(Vec<f64>, Vec<String>)> {
    let rate = cycle.sample_rate_hz as f64;
    let bands = decompose(&cycle.samples, rate, method, dcfg, cycle_seed(seed, &cycle.id))?;
    let mut notes = Vec::new();
    let mut row = Vec::new();
    let with_mfcc = !method.is_chained();
    for tag in band_layout(method, dcfg) {
        let fv = match bands.bands.iter().find(|b| b.tag == tag) {
            Some(b) => band_features(&b.samples, b.rate_hz, set, with_mfcc, fcfg)?,
            None => {
                notes.push(format!("band {} missing, filled with silent-band features", tag.name()));
                let silent = vec![0.0; fcfg.stft.frame_len];
                band_features(&silent, tag_rate(tag, rate), set, with_mfcc, fcfg)?
            }
        };
        row.extend(fv.values);
    }
    if let Some(bad) = row.iter().position(|v| !v.is_finite()) {
        return Err(Error::Degenerate(format!("non-finite feature at column {bad}")));
    }
    Ok((row, notes))
}

/// A per-cycle problem met while building a matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractIssue {
    pub cycle_id: String,
    pub message: String,
    /// True when the cycle was dropped from the matrix.
    pub dropped: bool,
}

#[derive(Debug, Clone)]
pub struct FeatureBuild {
    pub matrix: FeatureMatrix,
    pub issues: Vec<ExtractIssue>,
}

/// Decompose every cycle and extract `set` features. Cycles are processed
/// in parallel; row order follows `cycles`. Failed cycles are dropped and
/// reported.
pub fn build_feature_matrix(
    cycles: &[CycleRecord],
    method: Decomposition,
    set: FeatureSet,
    dcfg: &DecomposeConfig,
    fcfg: &FeatureConfig,
    seed: u64,
) -> Result<FeatureBuild> {
    fcfg.validate()?;
    let names = feature_names(method, set, dcfg, fcfg);
    let results: Vec<_> = cycles
        .par_iter()
        .map(|c| cycle_features(c, method, set, dcfg, fcfg, seed))
        .collect();
    let mut matrix = FeatureMatrix::empty(names);
    let mut issues = Vec::new();
    for (cycle, res) in cycles.iter().zip(results) {
        match res {
            Ok((row, notes)) => {
                issues.extend(notes.into_iter().map(|message| ExtractIssue {
                    cycle_id: cycle.id.clone(),
                    message,
                    dropped: false,
                }));
                matrix.push_row(cycle.id.clone(), cycle.meta.patient_id.clone(), row, cycle.label)?;
            }
            Err(e) => issues.push(ExtractIssue { cycle_id: cycle.id.clone(), message: e.to_string(), dropped: true }),
        }
    }
    for i in issues.iter().filter(|i| i.dropped) {
        log::warn!("dropped cycle {}: {}", i.cycle_id, i.message);
    }
    Ok(FeatureBuild { matrix, issues })
}
