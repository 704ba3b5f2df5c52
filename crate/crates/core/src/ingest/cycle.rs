use serde::{Deserialize, Serialize};

use super::annotation::{AnnotationRow, RecordingMeta};
use super::audio::AudioClip;
use crate::label::{Label, LabelScheme};

/// One labelled respiratory cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub id: String,
    pub meta: RecordingMeta,
    pub samples: Vec<f64>,
    pub sample_rate_hz: u32,
    pub label: Label,
}

impl CycleRecord {
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }
}

/// Cut `clip` into the annotated cycles retained by `scheme`.
///
/// Cycle ids are `<stem>_c<row>` with the row index taken before scheme
/// filtering, so ids are stable across schemes. Rows running past the end of
/// the clip are clamped; rows starting past it are dropped.
pub fn slice_cycles(
    clip: &AudioClip,
    rows: &[AnnotationRow],
    scheme: LabelScheme,
    stem: &str,
    meta: &RecordingMeta,
) -> Vec<CycleRecord> {
    let rate = clip.sample_rate_hz as f64;
    let n = clip.samples.len();
    let mut out = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let Some(label) = scheme.label(row.crackle, row.wheeze) else {
            continue;
        };
        let start = (row.start_s * rate).round() as usize;
        let mut end = (row.end_s * rate).round() as usize;
        if end > n {
            log::warn!(
                "{stem}: cycle {i} ends at {:.3}s past clip end {:.3}s, clamping",
                row.end_s,
                clip.duration_s()
            );
            end = n;
        }
        if start >= end {
            log::warn!("{stem}: cycle {i} is empty after clamping, skipped");
            continue;
        }
        out.push(CycleRecord {
            id: format!("{stem}_c{i:03}"),
            meta: meta.clone(),
            samples: clip.samples[start..end].to_vec(),
            sample_rate_hz: clip.sample_rate_hz,
            label,
        });
    }
    out
}
