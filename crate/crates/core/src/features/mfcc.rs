//! Mel-frequency cepstral coefficients.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::stft::{frames, magnitude_spectrogram, StftConfig};
use super::FrameMatrix;
use crate::error::{Error, Result};

const LOG_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MfccConfig {
    pub n_mels: usize,
    pub n_mfcc: usize,
    pub fmin: f64,
    /// Upper filterbank edge; `None` means the band's Nyquist frequency.
    pub fmax: Option<f64>,
}

impl Default for MfccConfig {
    fn default() -> Self {
        MfccConfig { n_mels: 40, n_mfcc: 20, fmin: 0.0, fmax: None }
    }
}

impl MfccConfig {
    pub fn column_names(&self) -> Vec<String> {
        (1..=self.n_mfcc).map(|i| format!("mfcc{i}")).collect()
    }

    fn edges(&self, rate_hz: f64) -> Result<(f64, f64)> {
        let nyquist = rate_hz / 2.0;
        let fmax = self.fmax.unwrap_or(nyquist).min(nyquist);
        if self.n_mfcc == 0 || self.n_mfcc > self.n_mels {
            return Err(Error::invalid(format!(
                "n_mfcc must be in 1..={} (got {})",
                self.n_mels, self.n_mfcc
            )));
        }
        if !(self.fmin >= 0.0 && self.fmin < fmax) {
            return Err(Error::invalid(format!("need 0 <= fmin < fmax, got {} and {fmax}", self.fmin)));
        }
        Ok((self.fmin, fmax))
    }
}

/// M(f) = 2595·log10(1 + f/700).
pub fn mel_scale(f: f64) -> Result<f64> {
    if !(f >= 0.0) {
        return Err(Error::invalid(format!("frequency must be >= 0, got {f}")));
    }
    Ok(2595.0 * (1.0 + f / 700.0).log10())
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular filters with centres equally spaced in mel, each scaled to
/// unit area (2 / (f_upper − f_lower)).
#[derive(Debug, Clone)]
pub struct MelFilterbank {
    /// `n_mels` rows of `n_bins` weights.
    pub weights: Vec<Vec<f64>>,
    /// Centre frequency of each filter in Hz.
    pub centers_hz: Vec<f64>,
}

impl MelFilterbank {
    pub fn new(n_mels: usize, bin_hz: &[f64], fmin: f64, fmax: f64) -> Result<Self> {
        let (mlo, mhi) = (mel_scale(fmin)?, mel_scale(fmax)?);
        let pts: Vec<f64> = (0..n_mels + 2)
            .map(|i| mel_to_hz(mlo + (mhi - mlo) * i as f64 / (n_mels + 1) as f64))
            .collect();
        let weights = (0..n_mels)
            .map(|m| {
                let (lo, c, hi) = (pts[m], pts[m + 1], pts[m + 2]);
                let norm = 2.0 / (hi - lo);
                bin_hz
                    .iter()
                    .map(|&f| {
                        let up = (f - lo) / (c - lo);
                        let down = (hi - f) / (hi - c);
                        up.min(down).max(0.0) * norm
                    })
                    .collect()
            })
            .collect();
        Ok(MelFilterbank { weights, centers_hz: pts[1..=n_mels].to_vec() })
    }

    fn apply(&self, power: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| w.iter().zip(power).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Orthonormal DCT-II matrix, `n_out` rows of length `n_in`.
pub fn dct2_ortho(n_out: usize, n_in: usize) -> Vec<Vec<f64>> {
    let n = n_in as f64;
    (0..n_out)
        .map(|k| {
            let s = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            (0..n_in)
                .map(|i| s * (PI * k as f64 * (2.0 * i as f64 + 1.0) / (2.0 * n)).cos())
                .collect()
        })
        .collect()
}

/// Frame-indexed MFCC matrix: power spectrum → mel filterbank → log → DCT-II.
pub fn mfcc(band: &[f64], stft: &StftConfig, cfg: &MfccConfig, rate_hz: f64) -> Result<FrameMatrix> {
    stft.validate()?;
    if band.is_empty() {
        return Err(Error::invalid("mfcc on an empty band"));
    }
    let (fmin, fmax) = cfg.edges(rate_hz)?;
    let bin_hz = stft.bin_hz(rate_hz);
    let bank = MelFilterbank::new(cfg.n_mels, &bin_hz, fmin, fmax)?;
    let dct = dct2_ortho(cfg.n_mfcc, cfg.n_mels);
    let frames = frames(band, stft);
    let spec = magnitude_spectrogram(&frames, stft);
    let mut degenerate = 0;
    let rows = spec
        .iter()
        .map(|mags| {
            if mags.iter().all(|&m| m == 0.0) {
                degenerate += 1;
            }
            let power: Vec<f64> = mags.iter().map(|m| m * m).collect();
            let logmel: Vec<f64> = bank.apply(&power).iter().map(|e| e.max(LOG_FLOOR).ln()).collect();
            dct.iter()
                .map(|row| row.iter().zip(&logmel).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    Ok(FrameMatrix { columns: cfg.column_names(), rows, degenerate_frames: degenerate })
}
