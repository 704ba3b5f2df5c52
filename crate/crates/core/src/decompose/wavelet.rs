//! Orthogonal discrete wavelet transform with the Daubechies-8 filter bank.
//!
//! Each level filters with the half-band low/high-pass pair and keeps every
//! second output, using periodic extension so the transform is orthonormal:
//! it reconstructs exactly and conserves energy. An odd-length level input is
//! extended by repeating its last sample before filtering.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// db8 decomposition low-pass filter (16 taps, 8 vanishing moments).
pub const DB8_DEC_LO: [f64; 16] = [
    -0.000_117_476_784_124_769_53,
    0.000_675_449_406_450_569_37,
    -0.000_391_740_373_376_947_05,
    -0.004_870_352_993_451_574_3,
    0.008_746_094_047_405_776_7,
    0.013_981_027_917_398_282,
    -0.044_088_253_930_794_752,
    -0.017_369_301_001_807_546,
    0.128_747_426_620_478_46,
    0.000_472_484_573_913_282_77,
    -0.284_015_542_961_546_93,
    -0.015_829_105_256_349_306,
    0.585_354_683_654_206_71,
    0.675_630_736_297_289_81,
    0.312_871_590_914_299_97,
    0.054_415_842_243_104_01,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum WaveletKind {
    #[default]
    #[serde(rename = "db8")]
    Db8,
}

impl std::str::FromStr for WaveletKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "db8" => Ok(WaveletKind::Db8),
            other => Err(Error::invalid(format!("unsupported wavelet `{other}` (only db8)"))),
        }
    }
}

/// An orthogonal two-channel filter bank in correlation form.
#[derive(Debug, Clone)]
pub struct FilterBank {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl FilterBank {
    pub fn new(kind: WaveletKind) -> Self {
        match kind {
            WaveletKind::Db8 => Self::from_dec_lo(&DB8_DEC_LO),
        }
    }

    pub fn from_dec_lo(dec_lo: &[f64]) -> Self {
        let lo: Vec<f64> = dec_lo.iter().rev().copied().collect();
        let n = lo.len();
        let hi = (0..n)
            .map(|j| if j % 2 == 0 { lo[n - 1 - j] } else { -lo[n - 1 - j] })
            .collect();
        FilterBank { lo, hi }
    }

    pub fn len(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_empty()
    }

    /// One analysis level: returns (approximation, detail), each of length
    /// `ceil(x.len() / 2)`.
    pub fn analyze(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let ext = even_extend(x);
        let m = ext.len();
        let half = m / 2;
        let mut approx = vec![0.0; half];
        let mut detail = vec![0.0; half];
        for k in 0..half {
            let mut a = 0.0;
            let mut d = 0.0;
            for (j, (&l, &h)) in self.lo.iter().zip(&self.hi).enumerate() {
                let v = ext[(2 * k + j) % m];
                a += l * v;
                d += h * v;
            }
            approx[k] = a;
            detail[k] = d;
        }
        (approx, detail)
    }

    /// Inverse of [`analyze`](Self::analyze); `out_len` is the original input
    /// length (the extension sample is dropped for odd lengths).
    pub fn synthesize(&self, approx: &[f64], detail: &[f64], out_len: usize) -> Vec<f64> {
        let m = 2 * approx.len();
        let mut out = vec![0.0; m];
        for k in 0..approx.len() {
            for (j, (&l, &h)) in self.lo.iter().zip(&self.hi).enumerate() {
                out[(2 * k + j) % m] += l * approx[k] + h * detail[k];
            }
        }
        out.truncate(out_len);
        out
    }
}

fn even_extend(x: &[f64]) -> Vec<f64> {
    let mut ext = x.to_vec();
    if ext.len() % 2 == 1 {
        ext.push(*x.last().expect("non-empty level input"));
    }
    ext
}

/// Multi-level decomposition: `details[0]` is level 1 (highest frequency).
#[derive(Debug, Clone)]
pub struct WaveletDecomposition {
    pub details: Vec<Vec<f64>>,
    pub approx: Vec<f64>,
    /// Input length at each level, for reconstruction.
    pub level_lengths: Vec<usize>,
    /// Levels requested but not performed because the signal became shorter
    /// than the filter.
    pub skipped_levels: usize,
}

impl WaveletDecomposition {
    pub fn levels(&self) -> usize {
        self.details.len()
    }
}

/// Decompose `x` over up to `levels` levels. Stops early when a level's input
/// is shorter than the filter.
pub fn wavedec(x: &[f64], bank: &FilterBank, levels: usize) -> Result<WaveletDecomposition> {
    if x.len() < bank.len() {
        return Err(Error::Decomposition(format!(
            "signal of length {} is shorter than the {}-tap filter",
            x.len(),
            bank.len()
        )));
    }
    let mut details = Vec::with_capacity(levels);
    let mut level_lengths = Vec::with_capacity(levels);
    let mut current = x.to_vec();
    for _ in 0..levels {
        if current.len() < bank.len() {
            break;
        }
        level_lengths.push(current.len());
        let (a, d) = bank.analyze(&current);
        details.push(d);
        current = a;
    }
    Ok(WaveletDecomposition {
        skipped_levels: levels - details.len(),
        details,
        approx: current,
        level_lengths,
    })
}

pub fn waverec(dec: &WaveletDecomposition, bank: &FilterBank) -> Vec<f64> {
    let mut current = dec.approx.clone();
    for level in (0..dec.details.len()).rev() {
        current = bank.synthesize(&current, &dec.details[level], dec.level_lengths[level]);
    }
    current
}

/// Frequency band `[lo, hi]` in Hz covered by the detail coefficients of
/// `level` (1-based) for a signal sampled at `rate_hz`.
pub fn detail_band_hz(rate_hz: f64, level: usize) -> (f64, f64) {
    let hi = rate_hz / 2f64.powi(level as i32);
    (hi / 2.0, hi)
}

/// Frequency band covered by the approximation left after `levels` levels.
pub fn approx_band_hz(rate_hz: f64, levels: usize) -> (f64, f64) {
    (0.0, rate_hz / 2f64.powi(levels as i32 + 1))
}
