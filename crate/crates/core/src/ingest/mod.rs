//! Corpus reading and cycle preprocessing.

pub mod annotation;
pub mod audio;
pub mod cycle;
pub mod preprocess;
pub mod resample;
pub mod store;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

pub use annotation::{parse_annotations, parse_filename_metadata, AnnotationRow, RecordingMeta};
pub use audio::{read_wav, AudioClip};
pub use cycle::{slice_cycles, CycleRecord};
pub use preprocess::{clip_to_max, denoise, normalize_amplitude, preprocess_cycle, PreprocessConfig};
pub use resample::resample;

use crate::error::{Error, Result};
use crate::label::LabelScheme;

/// A problem with one file or cycle that did not stop ingestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestIssue {
    pub source: String,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub cycles: Vec<CycleRecord>,
    pub issues: Vec<IngestIssue>,
}

/// `.wav` files in `dir`, sorted by file name.
pub fn list_recordings(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(Error::Format(format!("data directory {} does not exist", dir.display())));
    }
    let mut wavs: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("wav")))
        .collect();
    wavs.sort();
    Ok(wavs)
}

/// Read one recording and its same-stem `.txt` annotation, returning
/// preprocessed cycles plus any per-cycle issues.
pub fn load_recording(
    wav: &Path,
    scheme: LabelScheme,
    cfg: &PreprocessConfig,
) -> Result<(Vec<CycleRecord>, Vec<IngestIssue>)> {
    let stem = wav
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::Format(format!("{}: unreadable file name", wav.display())))?
        .to_string();
    let text = fs::read_to_string(wav.with_extension("txt"))
        .map_err(|e| Error::Format(format!("{stem}: annotation file: {e}")))?;
    let rows = parse_annotations(&text)?;
    let meta = parse_filename_metadata(&stem).unwrap_or_else(|_| RecordingMeta::opaque(&stem));
    let clip = read_wav(wav)?;
    let clip = resample(&clip, cfg.target_rate)?;
    let mut cycles = Vec::new();
    let mut issues = Vec::new();
    for c in slice_cycles(&clip, &rows, scheme, &stem, &meta) {
        let id = c.id.clone();
        match preprocess_cycle(c, cfg) {
            Ok(c) => cycles.push(c),
            Err(e) => issues.push(IngestIssue { source: id, message: e.to_string() }),
        }
    }
    Ok((cycles, issues))
}

/// Load every recording in `dir`. Per-file failures become issues; output
/// order follows file name order regardless of parallelism.
pub fn load_corpus(dir: &Path, scheme: LabelScheme, cfg: &PreprocessConfig) -> Result<Corpus> {
    let wavs = list_recordings(dir)?;
    let results: Vec<_> = wavs.par_iter().map(|w| (w, load_recording(w, scheme, cfg))).collect();
    let mut corpus = Corpus::default();
    for (path, res) in results {
        match res {
            Ok((cycles, issues)) => {
                corpus.cycles.extend(cycles);
                corpus.issues.extend(issues);
            }
            Err(e) => corpus.issues.push(IngestIssue {
                source: path.display().to_string(),
                message: e.to_string(),
            }),
        }
    }
    for issue in &corpus.issues {
        log::warn!("{}: {}", issue.source, issue.message);
    }
    Ok(corpus)
}
