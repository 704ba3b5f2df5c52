use super::FeatureVector;
use crate::error::{Error, Result};

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population standard deviation.
pub fn std_pop(x: &[f64]) -> f64 {
    let m = mean(x);
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64).sqrt()
}

/// Central moments 2..=4 about the mean (population convention).
fn central_moments(x: &[f64]) -> (f64, f64, f64) {
    let m = mean(x);
    let n = x.len() as f64;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in x {
        let d = v - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (m2 / n, m3 / n, m4 / n)
}

/// Skewness m3/σ³ and non-excess kurtosis m4/σ⁴. Both are 0 for zero-variance
/// data, signalled by the returned flag.
pub fn skew_kurtosis(x: &[f64]) -> (f64, f64, bool) {
    let (m2, m3, m4) = central_moments(x);
    let scale = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m2 <= (scale * 1e-12).powi(2) || m2 == 0.0 {
        return (0.0, 0.0, true);
    }
    (m3 / m2.powf(1.5), m4 / (m2 * m2), false)
}

pub fn skewness(x: &[f64]) -> f64 {
    skew_kurtosis(x).0
}

pub fn median(x: &[f64]) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn min_max(x: &[f64]) -> (f64, f64) {
    x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// mean, std, min, max.
pub fn simple_stats(band: &[f64]) -> Result<FeatureVector> {
    if band.is_empty() {
        return Err(Error::invalid("simple_stats on an empty band"));
    }
    let (lo, hi) = min_max(band);
    Ok(FeatureVector::new(
        ["mean", "std", "min", "max"],
        vec![mean(band), std_pop(band), lo, hi],
    ))
}

/// Shannon entropy −Σ d²·ln(d²), with 0·ln 0 taken as 0.
pub fn shannon_entropy(band: &[f64]) -> f64 {
    -band
        .iter()
        .map(|d| d * d)
        .filter(|&p| p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>()
}

/// Mean power (1/N)·Σ|d|².
pub fn energy(band: &[f64]) -> f64 {
    band.iter().map(|d| d * d).sum::<f64>() / band.len() as f64
}

/// skewness, kurtosis, entropy, energy.
pub fn hos_features(band: &[f64]) -> Result<FeatureVector> {
    if band.is_empty() {
        return Err(Error::invalid("hos_features on an empty band"));
    }
    let (skew, kurt, degenerate) = skew_kurtosis(band);
    let mut fv = FeatureVector::new(
        ["skewness", "kurtosis", "entropy", "energy"],
        vec![skew, kurt, shannon_entropy(band), energy(band)],
    );
    if degenerate {
        fv.flags.push("zero variance: skewness/kurtosis set to 0".into());
    }
    Ok(fv)
}
