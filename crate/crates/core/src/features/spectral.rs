//! Per-frame spectral shape features.

use serde::{Deserialize, Serialize};

use super::stft::{frames, magnitude_spectrogram, StftConfig};
use super::FrameMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectralConfig {
    /// Order p of the spectral bandwidth.
    pub bandwidth_order: f64,
    pub rolloff_percent: f64,
    pub contrast_bands: usize,
    pub contrast_quantile: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            bandwidth_order: 2.0,
            rolloff_percent: 0.85,
            contrast_bands: 6,
            contrast_quantile: 0.02,
        }
    }
}

impl SpectralConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rolloff_percent > 0.0 && self.rolloff_percent < 1.0) {
            return Err(Error::invalid("rolloff_percent must be in (0, 1)"));
        }
        if !(self.bandwidth_order >= 1.0) {
            return Err(Error::invalid("bandwidth_order must be >= 1"));
        }
        if !(self.contrast_quantile > 0.0 && self.contrast_quantile < 0.5) {
            return Err(Error::invalid("contrast_quantile must be in (0, 0.5)"));
        }
        Ok(())
    }

    /// Column names of [`spectral_features`] in order.
    pub fn column_names(&self) -> Vec<String> {
        let mut names: Vec<String> = ["centroid", "bandwidth", "rolloff", "zcr"].map(String::from).into();
        names.extend((0..=self.contrast_bands).map(|b| format!("contrast{b}")));
        names
    }
}

/// Centroid of a magnitude spectrum; 0 for an all-zero frame.
pub fn centroid(mags: &[f64], bin_hz: &[f64]) -> f64 {
    let total: f64 = mags.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    mags.iter().zip(bin_hz).map(|(m, f)| m * f).sum::<f64>() / total
}

/// p-th order spread about `centroid`, with magnitudes normalised to sum to 1.
pub fn bandwidth(mags: &[f64], bin_hz: &[f64], centroid: f64, p: f64) -> f64 {
    let total: f64 = mags.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let s: f64 = mags
        .iter()
        .zip(bin_hz)
        .map(|(m, f)| m / total * (f - centroid).abs().powf(p))
        .sum();
    s.powf(1.0 / p)
}

/// Lowest bin frequency at which cumulative power reaches `percent` of the
/// frame's power.
pub fn rolloff(mags: &[f64], bin_hz: &[f64], percent: f64) -> f64 {
    let total: f64 = mags.iter().map(|m| m * m).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let target = percent * total;
    let mut acc = 0.0;
    for (m, &f) in mags.iter().zip(bin_hz) {
        acc += m * m;
        if acc >= target {
            return f;
        }
    }
    *bin_hz.last().expect("non-empty spectrum")
}

/// Sign changes between consecutive samples divided by the frame length.
pub fn zero_crossing_rate(frame: &[f64]) -> f64 {
    let crossings = frame.windows(2).filter(|w| (w[0] >= 0.0) != (w[1] >= 0.0)).count();
    crossings as f64 / frame.len() as f64
}

/// Octave sub-band edges below Nyquist: `[0, ny/2^B, ny/2^(B-1), .., ny/2, ny]`,
/// giving `B + 1` sub-bands.
pub fn contrast_edges(nyquist: f64, bands: usize) -> Vec<f64> {
    let mut edges = vec![0.0];
    edges.extend((0..=bands).map(|i| nyquist / 2f64.powi((bands - i) as i32)));
    edges
}

/// Peak-minus-valley contrast in dB per octave sub-band, where peak and
/// valley are mean powers of the top and bottom `quantile` of bins.
pub fn contrast(mags: &[f64], bin_hz: &[f64], cfg: &SpectralConfig) -> Vec<f64> {
    let nyquist = *bin_hz.last().expect("non-empty spectrum");
    let edges = contrast_edges(nyquist, cfg.contrast_bands);
    let n_sub = edges.len() - 1;
    (0..n_sub)
        .map(|b| {
            let (lo, hi) = (edges[b], edges[b + 1]);
            let mut powers: Vec<f64> = mags
                .iter()
                .zip(bin_hz)
                .filter(|(_, &f)| f >= lo && (f < hi || (b == n_sub - 1 && f <= hi)))
                .map(|(m, _)| m * m)
                .collect();
            if powers.is_empty() {
                return 0.0;
            }
            powers.sort_by(|a, b| a.total_cmp(b));
            let k = ((cfg.contrast_quantile * powers.len() as f64).round() as usize).max(1);
            let valley = powers[..k].iter().sum::<f64>() / k as f64;
            let peak = powers[powers.len() - k..].iter().sum::<f64>() / k as f64;
            10.0 * ((peak + 1e-10) / (valley + 1e-10)).log10()
        })
        .collect()
}

/// All spectral columns for one frame given its magnitude spectrum and
/// time-domain samples.
pub fn frame_features(mags: &[f64], frame: &[f64], bin_hz: &[f64], cfg: &SpectralConfig) -> Vec<f64> {
    let c = centroid(mags, bin_hz);
    let mut row = vec![
        c,
        bandwidth(mags, bin_hz, c, cfg.bandwidth_order),
        rolloff(mags, bin_hz, cfg.rolloff_percent),
        zero_crossing_rate(frame),
    ];
    row.extend(contrast(mags, bin_hz, cfg));
    row
}

/// Frame-indexed matrix of centroid, bandwidth, rolloff, zcr and the
/// contrast sub-bands.
pub fn spectral_features(band: &[f64], stft: &StftConfig, cfg: &SpectralConfig, rate_hz: f64) -> Result<FrameMatrix> {
    stft.validate()?;
    cfg.validate()?;
    if band.is_empty() {
        return Err(Error::invalid("spectral_features on an empty band"));
    }
    let frames = frames(band, stft);
    let spec = magnitude_spectrogram(&frames, stft);
    let bin_hz = stft.bin_hz(rate_hz);
    let mut degenerate = 0;
    let rows = spec
        .iter()
        .zip(&frames)
        .map(|(mags, frame)| {
            if mags.iter().all(|&m| m == 0.0) {
                degenerate += 1;
            }
            frame_features(mags, frame, &bin_hz, cfg)
        })
        .collect();
    Ok(FrameMatrix { columns: cfg.column_names(), rows, degenerate_frames: degenerate })
}
