use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};

/// One annotated respiratory cycle: time span plus the corpus flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRow {
    pub start_s: f64,
    pub end_s: f64,
    pub crackle: bool,
    pub wheeze: bool,
}

fn parse_flag(tok: &str, line: usize, what: &str) -> Result<bool> {
    match tok {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(Error::Parse {
            line,
            msg: format!("{what} flag must be 0 or 1, got `{other}`"),
        }),
    }
}

fn parse_time(tok: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("{what} time `{tok}` is not a number"),
    })?;
    if !v.is_finite() || v < 0.0 {
        return Err(Error::Parse {
            line,
            msg: format!("{what} time must be finite and >= 0, got {v}"),
        });
    }
    Ok(v)
}

/// Parse a whitespace-separated `start end crackle wheeze` annotation file.
///
/// Blank lines are skipped; line numbers in errors are 1-based.
pub fn parse_annotations(text: &str) -> Result<Vec<AnnotationRow>> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 4 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 4 columns, found {}", toks.len()),
            });
        }
        let start_s = parse_time(toks[0], line, "start")?;
        let end_s = parse_time(toks[1], line, "end")?;
        if end_s <= start_s {
            return Err(Error::Parse {
                line,
                msg: format!("end {end_s} is not after start {start_s}"),
            });
        }
        rows.push(AnnotationRow {
            start_s,
            end_s,
            crackle: parse_flag(toks[2], line, "crackle")?,
            wheeze: parse_flag(toks[3], line, "wheeze")?,
        });
    }
    Ok(rows)
}

/// Recording-level metadata carried by the corpus file naming convention
/// `patient_recording_location_mode_equipment.wav`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordingMeta {
    pub patient_id: String,
    pub recording_id: String,
    pub chest_location: String,
    pub acquisition_mode: String,
    pub equipment: String,
}

impl RecordingMeta {
    /// Metadata for a file whose name does not follow the convention: the
    /// stem is used as both patient and recording id.
    pub fn opaque(stem: &str) -> Self {
        RecordingMeta {
            patient_id: stem.to_string(),
            recording_id: stem.to_string(),
            chest_location: String::new(),
            acquisition_mode: String::new(),
            equipment: String::new(),
        }
    }
}

pub fn parse_filename_metadata(name: &str) -> Result<RecordingMeta> {
    let stem = Path::new(name)
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::Metadata(format!("`{name}` has no file stem")))?;
    let toks: Vec<&str> = stem.split('_').collect();
    if toks.len() != 5 || toks.iter().any(|t| t.is_empty()) {
        return Err(Error::Metadata(format!(
            "`{name}`: expected 5 underscore-separated tokens, found {}",
            toks.len()
        )));
    }
    Ok(RecordingMeta {
        patient_id: toks[0].into(),
        recording_id: toks[1].into(),
        chest_location: toks[2].into(),
        acquisition_mode: toks[3].into(),
        equipment: toks[4].into(),
    })
}
