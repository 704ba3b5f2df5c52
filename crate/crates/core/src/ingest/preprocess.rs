use serde::{Deserialize, Serialize};

use super::cycle::CycleRecord;
use crate::decompose::wavelet::{wavedec, waverec, FilterBank, WaveletKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub target_rate: u32,
    pub max_seconds: f64,
    pub denoise: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig { target_rate: 8000, max_seconds: 5.0, denoise: true }
    }
}

/// Keep at most the first `max_s` seconds. Shorter cycles are not padded.
pub fn clip_to_max(mut cycle: CycleRecord, max_s: f64) -> CycleRecord {
    let max_len = (max_s * cycle.sample_rate_hz as f64).floor() as usize;
    cycle.samples.truncate(max_len);
    cycle
}

const DENOISE_LEVELS: usize = 5;

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn hard_threshold(x: f64, t: f64) -> f64 {
    if x.abs() > t {
        x
    } else {
        0.0
    }
}

/// Wavelet shrinkage: db8, 5 levels, hard threshold at the universal level
/// `sigma * sqrt(2 ln N)` with `sigma = median(|d1|) / 0.6745`.
pub fn denoise_signal(x: &[f64]) -> Result<Vec<f64>> {
    let bank = FilterBank::new(WaveletKind::Db8);
    if x.len() < bank.len() {
        return Ok(x.to_vec());
    }
    let mut dec = wavedec(x, &bank, DENOISE_LEVELS)?;
    let mut d1: Vec<f64> = dec.details[0].iter().map(|v| v.abs()).collect();
    let sigma = median(&mut d1) / 0.6745;
    let thresh = sigma * (2.0 * (x.len() as f64).ln()).sqrt();
    for band in &mut dec.details {
        band.iter_mut().for_each(|c| *c = hard_threshold(*c, thresh));
    }
    let mut y = waverec(&dec, &bank);
    // odd-length levels carry a repeated sample, so energy can creep up by a hair
    let e_in: f64 = x.iter().map(|v| v * v).sum();
    let e_out: f64 = y.iter().map(|v| v * v).sum();
    if e_out > e_in {
        let s = (e_in / e_out).sqrt();
        y.iter_mut().for_each(|v| *v *= s);
    }
    Ok(y)
}

pub fn denoise(mut cycle: CycleRecord) -> Result<CycleRecord> {
    cycle.samples = denoise_signal(&cycle.samples)?;
    Ok(cycle)
}

/// Scale so the largest absolute sample is 1.
pub fn normalize_amplitude(mut cycle: CycleRecord) -> Result<CycleRecord> {
    let peak = cycle.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(Error::Degenerate(format!("cycle {} is identically zero", cycle.id)));
    }
    cycle.samples.iter_mut().for_each(|v| *v /= peak);
    Ok(cycle)
}

/// Clip, optionally denoise, then normalise one cycle.
pub fn preprocess_cycle(cycle: CycleRecord, cfg: &PreprocessConfig) -> Result<CycleRecord> {
    let mut c = clip_to_max(cycle, cfg.max_seconds);
    if cfg.denoise {
        c = denoise(c)?;
    }
    normalize_amplitude(c)
}
