//! Empirical mode decomposition and its noise-assisted ensemble variant.

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spline::natural_cubic_on_grid;
use super::{Band, BandSet, BandTag};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Cauchy-type sifting stop threshold on Σ(h_prev − h)² / Σ h_prev².
pub const SD_THRESHOLD: f64 = 0.2;
/// Mirrored extrema added beyond each signal end.
const MIRRORED_EXTREMA: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmdConfig {
    pub max_imfs: usize,
    pub max_sift_iters: usize,
    pub keep_modes: usize,
}

impl Default for EmdConfig {
    fn default() -> Self {
        EmdConfig { max_imfs: 10, max_sift_iters: 10, keep_modes: 5 }
    }
}

impl EmdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.keep_modes == 0 || self.keep_modes > self.max_imfs {
            return Err(Error::invalid(format!(
                "keep_modes must be in 1..={} (got {})",
                self.max_imfs, self.keep_modes
            )));
        }
        if self.max_sift_iters == 0 {
            return Err(Error::invalid("max_sift_iters must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EemdConfig {
    pub emd: EmdConfig,
    pub ensembles: usize,
    /// Noise standard deviation as a fraction of the signal's.
    pub noise_std_fraction: f64,
    pub seed: u64,
}

impl Default for EemdConfig {
    fn default() -> Self {
        EemdConfig { emd: EmdConfig::default(), ensembles: 2, noise_std_fraction: 0.2, seed: 0 }
    }
}

/// Indices of local maxima and minima (plateaus count once, at their left edge).
pub fn extrema(x: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    for i in 1..x.len().saturating_sub(1) {
        if x[i - 1] < x[i] && x[i] >= x[i + 1] {
            maxima.push(i);
        } else if x[i - 1] > x[i] && x[i] <= x[i + 1] {
            minima.push(i);
        }
    }
    (maxima, minima)
}

pub fn zero_crossings(x: &[f64]) -> usize {
    let mut count = 0;
    let mut prev_sign = 0i8;
    for &v in x {
        let s = if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        };
        if s != 0 {
            if prev_sign != 0 && s != prev_sign {
                count += 1;
            }
            prev_sign = s;
        }
    }
    count
}

/// |#extrema − #zero crossings| ≤ 1.
pub fn satisfies_imf_criterion(x: &[f64]) -> bool {
    let (mx, mn) = extrema(x);
    (mx.len() + mn.len()).abs_diff(zero_crossings(x)) <= 1
}

fn envelope(x: &[f64], idx: &[usize]) -> Vec<f64> {
    let n = x.len();
    let last = (n - 1) as f64;
    let k = MIRRORED_EXTREMA.min(idx.len());
    let mut xs = Vec::with_capacity(idx.len() + 2 * k);
    let mut ys = Vec::with_capacity(idx.len() + 2 * k);
    for &p in idx[..k].iter().rev() {
        xs.push(-(p as f64));
        ys.push(x[p]);
    }
    for &p in idx {
        xs.push(p as f64);
        ys.push(x[p]);
    }
    for &p in idx[idx.len() - k..].iter().rev() {
        xs.push(2.0 * last - p as f64);
        ys.push(x[p]);
    }
    natural_cubic_on_grid(&xs, &ys, n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiftReport {
    pub iterations: usize,
    /// True when sifting ended on the SD + IMF criterion rather than the cap.
    pub converged: bool,
}

fn sift(r: &[f64], max_iters: usize) -> (Vec<f64>, SiftReport) {
    let mut h = r.to_vec();
    for it in 1..=max_iters {
        let (maxima, minima) = extrema(&h);
        if maxima.is_empty() || minima.is_empty() {
            return (h, SiftReport { iterations: it - 1, converged: false });
        }
        let upper = envelope(&h, &maxima);
        let lower = envelope(&h, &minima);
        let mut num = 0.0;
        let mut den = 0.0;
        let next: Vec<f64> = h
            .iter()
            .zip(upper.iter().zip(&lower))
            .map(|(&v, (&u, &l))| {
                let nv = v - 0.5 * (u + l);
                num += (v - nv) * (v - nv);
                den += v * v;
                nv
            })
            .collect();
        h = next;
        let sd = if den > 0.0 { num / den } else { 0.0 };
        if sd < SD_THRESHOLD && satisfies_imf_criterion(&h) {
            return (h, SiftReport { iterations: it, converged: true });
        }
    }
    (h, SiftReport { iterations: max_iters, converged: false })
}

/// Every IMF extracted, the final residual, and how each sift ended.
#[derive(Debug, Clone)]
pub struct EmdOutput {
    pub imfs: Vec<Vec<f64>>,
    pub residual: Vec<f64>,
    pub sifts: Vec<SiftReport>,
}

fn check_signal(signal: &[f64]) -> Result<()> {
    if signal.len() < 8 {
        return Err(Error::Decomposition(format!(
            "EMD needs at least 8 samples, got {}",
            signal.len()
        )));
    }
    if signal.iter().any(|v| !v.is_finite()) {
        return Err(Error::Decomposition("signal contains non-finite values".into()));
    }
    let first = signal[0];
    if signal.iter().all(|&v| v == first) {
        return Err(Error::Decomposition("signal is constant".into()));
    }
    Ok(())
}

/// Full EMD: extracts IMFs until the residual has fewer than three extrema or
/// `max_imfs` is reached. `Σ imfs + residual` reproduces the input.
pub fn emd_full(signal: &[f64], cfg: &EmdConfig) -> Result<EmdOutput> {
    check_signal(signal)?;
    let mut residual = signal.to_vec();
    let mut imfs = Vec::new();
    let mut sifts = Vec::new();
    while imfs.len() < cfg.max_imfs {
        let (mx, mn) = extrema(&residual);
        if mx.len() + mn.len() < 3 {
            break;
        }
        let (imf, report) = sift(&residual, cfg.max_sift_iters);
        residual.iter_mut().zip(&imf).for_each(|(r, v)| *r -= v);
        imfs.push(imf);
        sifts.push(report);
    }
    Ok(EmdOutput { imfs, residual, sifts })
}

fn imf_bandset(imfs: Vec<Vec<f64>>, residual: Vec<f64>, keep: usize, rate_hz: f64, note: String) -> BandSet {
    let bands = imfs
        .into_iter()
        .take(keep)
        .enumerate()
        .map(|(i, samples)| Band { tag: BandTag::Imf { index: i + 1 }, samples, rate_hz })
        .collect();
    BandSet { bands, residual: Some(residual), source_rate_hz: rate_hz, notes: vec![note] }
}

/// EMD keeping the first `keep_modes` IMFs as bands. Fewer bands are returned
/// when the signal yields fewer IMFs.
pub fn emd(signal: &[f64], rate_hz: f64, cfg: &EmdConfig) -> Result<BandSet> {
    cfg.validate()?;
    let out = emd_full(signal, cfg)?;
    let n = out.imfs.len();
    let note = format!("emd: {n} IMFs extracted, {} kept", n.min(cfg.keep_modes));
    Ok(imf_bandset(out.imfs, out.residual, cfg.keep_modes, rate_hz, note))
}

fn std_dev(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

/// Ensemble-averaged IMFs (all modes) and the averaged residual.
///
/// Member `w` adds Gaussian noise drawn from a generator seeded with
/// `seed + w`. A member with fewer IMFs contributes zeros to the missing
/// modes, so every mode is an average of exactly `ensembles` terms.
pub fn eemd_full(signal: &[f64], cfg: &EemdConfig) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    if cfg.ensembles == 0 {
        return Err(Error::invalid("ensembles must be >= 1"));
    }
    if !(cfg.noise_std_fraction >= 0.0) {
        return Err(Error::invalid("noise_std_fraction must be >= 0"));
    }
    check_signal(signal)?;
    let sigma = cfg.noise_std_fraction * std_dev(signal);
    let members: Vec<EmdOutput> = (0..cfg.ensembles)
        .into_par_iter()
        .map(|w| {
            let perturbed: Vec<f64> = if sigma > 0.0 {
                let mut rng = rng_from_seed(cfg.seed.wrapping_add(w as u64));
                let normal = Normal::new(0.0, sigma).expect("positive sigma");
                signal.iter().map(|v| v + normal.sample(&mut rng)).collect()
            } else {
                signal.to_vec()
            };
            emd_full(&perturbed, &cfg.emd)
        })
        .collect::<Result<_>>()?;

    let n = signal.len();
    let modes = members.iter().map(|m| m.imfs.len()).max().unwrap_or(0);
    let w = cfg.ensembles as f64;
    let mut imfs = vec![vec![0.0; n]; modes];
    let mut residual = vec![0.0; n];
    for m in &members {
        for (acc, imf) in imfs.iter_mut().zip(&m.imfs) {
            acc.iter_mut().zip(imf).for_each(|(a, v)| *a += v);
        }
        residual.iter_mut().zip(&m.residual).for_each(|(a, v)| *a += v);
    }
    for imf in imfs.iter_mut() {
        imf.iter_mut().for_each(|a| *a /= w);
    }
    residual.iter_mut().for_each(|a| *a /= w);
    Ok((imfs, residual))
}

pub fn eemd(signal: &[f64], rate_hz: f64, cfg: &EemdConfig) -> Result<BandSet> {
    cfg.emd.validate()?;
    let (imfs, residual) = eemd_full(signal, cfg)?;
    let n = imfs.len();
    let note = format!(
        "eemd: {} ensembles, noise fraction {}, {n} modes averaged, {} kept",
        cfg.ensembles,
        cfg.noise_std_fraction,
        n.min(cfg.emd.keep_modes)
    );
    Ok(imf_bandset(imfs, residual, cfg.emd.keep_modes, rate_hz, note))
}
