use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    #[default]
    Hann,
    Rectangular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StftConfig {
    pub frame_len: usize,
    pub hop: usize,
    pub window: WindowKind,
}

impl Default for StftConfig {
    fn default() -> Self {
        StftConfig { frame_len: 256, hop: 128, window: WindowKind::Hann }
    }
}

impl StftConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.frame_len.is_power_of_two() || self.frame_len < 2 {
            return Err(Error::invalid(format!("frame_len {} must be a power of two", self.frame_len)));
        }
        if self.hop == 0 || self.hop > self.frame_len {
            return Err(Error::invalid(format!("hop must be in 1..={}", self.frame_len)));
        }
        Ok(())
    }

    pub fn n_bins(&self) -> usize {
        self.frame_len / 2 + 1
    }

    /// Frequencies of the one-sided spectrum bins.
    pub fn bin_hz(&self, rate_hz: f64) -> Vec<f64> {
        (0..self.n_bins()).map(|k| k as f64 * rate_hz / self.frame_len as f64).collect()
    }

    fn window(&self) -> Vec<f64> {
        let n = self.frame_len as f64;
        match self.window {
            WindowKind::Hann => (0..self.frame_len)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n).cos())
                .collect(),
            WindowKind::Rectangular => vec![1.0; self.frame_len],
        }
    }
}

/// Time-domain frames (not windowed). Bands shorter than one frame are
/// zero-padded to a single frame.
pub fn frames(band: &[f64], cfg: &StftConfig) -> Vec<Vec<f64>> {
    let n = cfg.frame_len;
    if band.len() <= n {
        let mut f = band.to_vec();
        f.resize(n, 0.0);
        return vec![f];
    }
    let count = 1 + (band.len() - n) / cfg.hop;
    (0..count).map(|t| band[t * cfg.hop..t * cfg.hop + n].to_vec()).collect()
}

/// Magnitude spectrogram: one `n_bins` vector per frame.
pub fn magnitude_spectrogram(frames: &[Vec<f64>], cfg: &StftConfig) -> Vec<Vec<f64>> {
    let window = cfg.window();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(cfg.frame_len);
    let mut buf = vec![Complex::new(0.0, 0.0); cfg.frame_len];
    frames
        .iter()
        .map(|frame| {
            for ((b, &x), &w) in buf.iter_mut().zip(frame).zip(&window) {
                *b = Complex::new(x * w, 0.0);
            }
            fft.process(&mut buf);
            buf[..cfg.n_bins()].iter().map(|c| c.norm()).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_counts() {
        let cfg = StftConfig::default();
        assert_eq!(frames(&vec![0.0; 256], &cfg).len(), 1);
        assert_eq!(frames(&vec![0.0; 100], &cfg).len(), 1);
        assert_eq!(frames(&vec![0.0; 100], &cfg)[0].len(), 256);
        assert_eq!(frames(&vec![0.0; 16000], &cfg).len(), 1 + (16000 - 256) / 128);
    }

    #[test]
    fn config_validation() {
        assert!(StftConfig { frame_len: 250, ..Default::default() }.validate().is_err());
        assert!(StftConfig { hop: 0, ..Default::default() }.validate().is_err());
        assert!(StftConfig { hop: 512, ..Default::default() }.validate().is_err());
        assert!(StftConfig::default().validate().is_ok());
    }
}
