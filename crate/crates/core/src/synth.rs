//! Synthetic crackle corpus in the on-disk recording + annotation format.
//!
//! Every cycle is pink breathing noise below 600 Hz under a breathing
//! envelope; crackle cycles add 3–8 short bursts band-limited to
//! 200–2000 Hz. A few cycles also carry a wheeze flag and a faint tone.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ingest::audio::{write_wav_i16, AudioClip};
use crate::rng::{derive_seed, rng_from_seed, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub sample_rate_hz: u32,
    pub cycles_per_recording: usize,
    pub patients: usize,
    /// Probability that a cycle carries the wheeze flag.
    pub wheeze_fraction: f64,
    pub min_cycle_ms: u32,
    pub max_cycle_ms: u32,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            sample_rate_hz: 16000,
            cycles_per_recording: 4,
            patients: 20,
            wheeze_fraction: 0.1,
            min_cycle_ms: 1500,
            max_cycle_ms: 3000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSummary {
    pub recordings: usize,
    pub cycles: usize,
    pub crackle_cycles: usize,
    pub wheeze_cycles: usize,
}

const BREATH_HI_HZ: f64 = 600.0;
const BREATH_LO_HZ: f64 = 20.0;
const BURST_LO_HZ: f64 = 200.0;
const BURST_HI_HZ: f64 = 2000.0;
const CHEST: [&str; 7] = ["Al", "Ar", "Pl", "Pr", "Tc", "Ll", "Lr"];
const EQUIPMENT: [&str; 4] = ["AKGC417L", "LittC2SE", "Meditron", "Litt3200"];

/// Gaussian noise shaped in the frequency domain: zero outside [lo, hi],
/// amplitude ∝ f^(−slope/2) inside. Output has unit RMS.
fn shaped_noise(n: usize, rate: f64, lo: f64, hi: f64, slope: f64, rng: &mut Rng) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> =
        (0..n).map(|_| Complex::new(StandardNormal.sample(rng), 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let bin = k.min(n - k);
        let f = bin as f64 * rate / n as f64;
        *c *= if f >= lo && f <= hi { f.powf(-slope / 2.0) } else { 0.0 };
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let out: Vec<f64> = buf.iter().map(|c| c.re).collect();
    let rms = (out.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    if rms > 0.0 {
        out.iter().map(|v| v / rms).collect()
    } else {
        out
    }
}

fn cycle_signal(n: usize, rate: f64, crackle: bool, wheeze: bool, rng: &mut Rng) -> Vec<f64> {
    let mut x = shaped_noise(n, rate, BREATH_LO_HZ, BREATH_HI_HZ, 1.0, rng);
    // inhale/exhale hump with a floor so the cycle never goes silent
    for (i, v) in x.iter_mut().enumerate() {
        let env = 0.3 + 0.7 * (PI * i as f64 / n as f64).sin().powi(2);
        *v *= 0.08 * env;
    }
    if wheeze {
        let f = rng.random_range(250.0..500.0);
        let phase = rng.random_range(0.0..2.0 * PI);
        for (i, v) in x.iter_mut().enumerate() {
            *v += 0.02 * (2.0 * PI * f * i as f64 / rate + phase).sin();
        }
    }
    if crackle {
        let bursts = rng.random_range(3..=8);
        for _ in 0..bursts {
            let len = ((rng.random_range(5.0..=15.0) / 1000.0) * rate).round() as usize;
            let start = rng.random_range(0..n.saturating_sub(len).max(1));
            let burst = shaped_noise(len.max(8), rate, BURST_LO_HZ, BURST_HI_HZ, 0.0, rng);
            let amp = rng.random_range(0.25..0.5);
            for (j, b) in burst.iter().enumerate().take(n - start) {
                let w = (PI * j as f64 / len as f64).sin().powi(2);
                x[start + j] += amp * w * b;
            }
        }
    }
    x
}

/// Write `n_cycles` cycles (half of them crackles) as recordings of
/// `cycles_per_recording` cycles each. Same seed ⇒ byte-identical files.
pub fn make_synthetic_corpus_with(n_cycles: usize, seed: u64, out_dir: &Path, cfg: &SynthConfig) -> Result<SynthSummary> {
    if n_cycles == 0 || !n_cycles.is_multiple_of(2) {
        return Err(Error::invalid(format!("synthetic corpus needs an even, positive cycle count, got {n_cycles}")));
    }
    if cfg.cycles_per_recording == 0 || cfg.patients == 0 || cfg.min_cycle_ms == 0 || cfg.max_cycle_ms < cfg.min_cycle_ms {
        return Err(Error::invalid("invalid synthetic corpus configuration"));
    }
    std::fs::create_dir_all(out_dir)?;
    let rate = cfg.sample_rate_hz as f64;
    let mut rng = rng_from_seed(derive_seed(seed, &[0x5e]));
    let mut crackle: Vec<bool> = (0..n_cycles).map(|i| i < n_cycles / 2).collect();
    crackle.shuffle(&mut rng);
    let wheeze: Vec<bool> = (0..n_cycles).map(|_| rng.random_bool(cfg.wheeze_fraction.clamp(0.0, 1.0))).collect();

    let mut summary = SynthSummary { recordings: 0, cycles: n_cycles, crackle_cycles: n_cycles / 2, wheeze_cycles: 0 };
    for (rec, chunk) in (0..n_cycles).collect::<Vec<_>>().chunks(cfg.cycles_per_recording).enumerate() {
        let mut rec_rng = rng_from_seed(derive_seed(seed, &[rec as u64]));
        let mut samples = Vec::new();
        let mut annotation = String::new();
        for &c in chunk {
            let ms = rec_rng.random_range(cfg.min_cycle_ms..=cfg.max_cycle_ms);
            let n = (ms as u64 * cfg.sample_rate_hz as u64 / 1000) as usize;
            let start = samples.len() as f64 / rate;
            samples.extend(cycle_signal(n, rate, crackle[c], wheeze[c], &mut rec_rng));
            let end = samples.len() as f64 / rate;
            writeln!(annotation, "{start:.4}\t{end:.4}\t{}\t{}", u8::from(crackle[c]), u8::from(wheeze[c]))
                .expect("writing to a String");
            summary.wheeze_cycles += usize::from(wheeze[c]);
        }
        let patient = 101 + rec % cfg.patients;
        let stem = format!(
            "{patient}_{}b1_{}_{}_{}",
            rec / cfg.patients + 1,
            CHEST[rec % CHEST.len()],
            if rec % 3 == 0 { "mc" } else { "sc" },
            EQUIPMENT[patient % EQUIPMENT.len()]
        );
        write_wav_i16(&out_dir.join(format!("{stem}.wav")), &AudioClip::new(samples, cfg.sample_rate_hz)?)?;
        std::fs::write(out_dir.join(format!("{stem}.txt")), annotation)?;
        summary.recordings += 1;
    }
    Ok(summary)
}

pub fn make_synthetic_corpus(n_cycles: usize, seed: u64, out_dir: &Path) -> Result<SynthSummary> {
    make_synthetic_corpus_with(n_cycles, seed, out_dir, &SynthConfig::default())
}
