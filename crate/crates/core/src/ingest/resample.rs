//! Rational-ratio downsampling with a Kaiser-windowed sinc polyphase filter.

use super::audio::AudioClip;
use crate::error::{Error, Result};

/// Target stopband attenuation in dB.
const STOPBAND_DB: f64 = 60.0;
/// Passband and stopband edges as fractions of the output Nyquist frequency.
const PASS_EDGE: f64 = 0.85;
const STOP_EDGE: f64 = 1.0;
/// Above this many phases the taps are computed per output sample.
const MAX_CACHED_PHASES: u64 = 2048;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Zeroth-order modified Bessel function of the first kind.
fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn kaiser_beta(atten_db: f64) -> f64 {
    if atten_db > 50.0 {
        0.1102 * (atten_db - 8.7)
    } else if atten_db >= 21.0 {
        0.5842 * (atten_db - 21.0).powf(0.4) + 0.07886 * (atten_db - 21.0)
    } else {
        0.0
    }
}

struct Kernel {
    /// Cutoff in cycles per source sample.
    cutoff: f64,
    beta: f64,
    i0_beta: f64,
    /// Half-width in source samples.
    half_width: usize,
}

impl Kernel {
    fn design(source: u32, target: u32) -> Self {
        let ratio = target as f64 / source as f64;
        let nyq_out = 0.5 * ratio;
        let cutoff = 0.5 * (PASS_EDGE + STOP_EDGE) * nyq_out;
        let transition = (STOP_EDGE - PASS_EDGE) * nyq_out;
        let taps = (STOPBAND_DB - 7.95) / (2.285 * 2.0 * std::f64::consts::PI * transition) + 1.0;
        let beta = kaiser_beta(STOPBAND_DB);
        Kernel {
            cutoff,
            beta,
            i0_beta: bessel_i0(beta),
            half_width: (taps / 2.0).ceil() as usize,
        }
    }

    fn eval(&self, dt: f64) -> f64 {
        let hw = self.half_width as f64;
        if dt.abs() >= hw {
            return 0.0;
        }
        let arg = 2.0 * self.cutoff * dt;
        let sinc = if arg == 0.0 {
            1.0
        } else {
            let p = std::f64::consts::PI * arg;
            p.sin() / p
        };
        let r = dt / hw;
        let win = bessel_i0(self.beta * (1.0 - r * r).sqrt()) / self.i0_beta;
        2.0 * self.cutoff * sinc * win
    }

    /// Taps for source indices `base - hw + 1 ..= base + hw` at fractional
    /// offset `frac`, normalised to unit DC gain.
    fn taps(&self, frac: f64) -> Vec<f64> {
        let hw = self.half_width as i64;
        let mut taps: Vec<f64> = (-hw + 1..=hw).map(|k| self.eval(frac - k as f64)).collect();
        let sum: f64 = taps.iter().sum();
        taps.iter_mut().for_each(|t| *t /= sum);
        taps
    }
}

/// Downsample `clip` to `target_rate` Hz. Equal rates return the input
/// unchanged; upsampling is rejected.
pub fn resample(clip: &AudioClip, target_rate: u32) -> Result<AudioClip> {
    let source = clip.sample_rate_hz;
    if target_rate == 0 {
        return Err(Error::invalid("target rate must be positive"));
    }
    if target_rate > source {
        return Err(Error::Unsupported(format!(
            "upsampling from {source} Hz to {target_rate} Hz"
        )));
    }
    if target_rate == source {
        return Ok(clip.clone());
    }
    let g = gcd(source as u64, target_rate as u64);
    let up = target_rate as u64 / g;
    let down = source as u64 / g;
    let kernel = Kernel::design(source, target_rate);
    let x = &clip.samples;
    let n_in = x.len() as u64;
    let n_out = (n_in * up).div_ceil(down) as usize;
    let hw = kernel.half_width as i64;

    let cached: Option<Vec<Vec<f64>>> = (up <= MAX_CACHED_PHASES)
        .then(|| (0..up).map(|p| kernel.taps(p as f64 / up as f64)).collect());

    let mut out = Vec::with_capacity(n_out);
    for m in 0..n_out as u64 {
        let pos = m * down;
        let base = (pos / up) as i64;
        let phase = pos % up;
        let owned;
        let taps: &[f64] = match &cached {
            Some(c) => &c[phase as usize],
            None => {
                owned = kernel.taps(phase as f64 / up as f64);
                &owned
            }
        };
        let mut acc = 0.0;
        for (j, &t) in taps.iter().enumerate() {
            let idx = base - hw + 1 + j as i64;
            if idx >= 0 && (idx as usize) < x.len() {
                acc += t * x[idx as usize];
            }
        }
        out.push(acc);
    }
    AudioClip::new(out, target_rate)
}
