//! On-disk cycle store: a CSV manifest plus one LSC1 sample file per cycle.
//!
//! LSC1 layout: `b"LSC1"`, little-endian u32 sample rate, then little-endian
//! f32 samples to end of file.

use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::Path;

use super::annotation::RecordingMeta;
use super::cycle::CycleRecord;
use crate::error::{Error, Result};
use crate::label::Label;

pub const LSC1_MAGIC: &[u8; 4] = b"LSC1";
pub const MANIFEST_FILE: &str = "manifest.csv";

pub fn encode_lsc1(samples: &[f64], rate_hz: u32) -> Vec<u8> {
    let mut buf = Vec::with_capacity(8 + 4 * samples.len());
    buf.extend_from_slice(LSC1_MAGIC);
    buf.extend_from_slice(&rate_hz.to_le_bytes());
    for &s in samples {
        buf.extend_from_slice(&(s as f32).to_le_bytes());
    }
    buf
}

pub fn decode_lsc1(bytes: &[u8]) -> Result<(Vec<f64>, u32)> {
    if bytes.len() < 8 || &bytes[..4] != LSC1_MAGIC {
        return Err(Error::Format("missing LSC1 header".into()));
    }
    let body = &bytes[8..];
    if !body.len().is_multiple_of(4) {
        return Err(Error::Format(format!("LSC1 body of {} bytes is not f32-aligned", body.len())));
    }
    let rate = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    let samples = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
        .collect();
    Ok((samples, rate))
}

pub fn write_lsc1(path: &Path, samples: &[f64], rate_hz: u32) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_lsc1(samples, rate_hz))?;
    Ok(())
}

pub fn read_lsc1(path: &Path) -> Result<(Vec<f64>, u32)> {
    decode_lsc1(&fs::read(path)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestRow {
    cycle_id: String,
    patient_id: String,
    recording_id: String,
    chest_location: String,
    acquisition_mode: String,
    equipment: String,
    label: Label,
    sample_rate_hz: u32,
    n_samples: usize,
    duration_s: f64,
    file: String,
}

/// Write `cycles` into `dir` (created if needed).
pub fn write_cycle_store(dir: &Path, cycles: &[CycleRecord]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join(MANIFEST_FILE))?;
    for c in cycles {
        let file = format!("{}.lsc", c.id);
        write_lsc1(&dir.join(&file), &c.samples, c.sample_rate_hz)?;
        w.serialize(ManifestRow {
            cycle_id: c.id.clone(),
            patient_id: c.meta.patient_id.clone(),
            recording_id: c.meta.recording_id.clone(),
            chest_location: c.meta.chest_location.clone(),
            acquisition_mode: c.meta.acquisition_mode.clone(),
            equipment: c.meta.equipment.clone(),
            label: c.label,
            sample_rate_hz: c.sample_rate_hz,
            n_samples: c.samples.len(),
            duration_s: c.duration_s(),
            file,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Read a store written by [`write_cycle_store`]. Samples come back at f32
/// precision.
pub fn read_cycle_store(dir: &Path) -> Result<Vec<CycleRecord>> {
    let manifest = dir.join(MANIFEST_FILE);
    if !manifest.exists() {
        return Err(Error::Format(format!("no cycle manifest at {}", manifest.display())));
    }
    let mut r = csv::Reader::from_path(manifest)?;
    let mut out = Vec::new();
    for row in r.deserialize::<ManifestRow>() {
        let row = row?;
        let (samples, rate) = read_lsc1(&dir.join(&row.file))?;
        if rate != row.sample_rate_hz || samples.len() != row.n_samples {
            return Err(Error::Format(format!("{}: sample file disagrees with manifest", row.file)));
        }
        out.push(CycleRecord {
            id: row.cycle_id,
            meta: RecordingMeta {
                patient_id: row.patient_id,
                recording_id: row.recording_id,
                chest_location: row.chest_location,
                acquisition_mode: row.acquisition_mode,
                equipment: row.equipment,
            },
            samples,
            sample_rate_hz: rate,
            label: row.label,
        });
    }
    Ok(out)
}
