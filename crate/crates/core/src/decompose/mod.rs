//! Band decompositions of a single cycle.

pub mod emd;
pub mod spline;
pub mod wavelet;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

pub use emd::{eemd, emd, EemdConfig, EmdConfig};
pub use wavelet::{FilterBank, WaveletKind};

use crate::error::{Error, Result};

/// Where a band came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum BandTag {
    Raw,
    Imf { index: usize },
    Dwt { level: usize },
    ImfDwt { imf: usize, level: usize },
}

impl BandTag {
    /// Short stable name used as a feature-name prefix.
    pub fn name(&self) -> String {
        match self {
            BandTag::Raw => "raw".into(),
            BandTag::Imf { index } => format!("imf{index}"),
            BandTag::Dwt { level } => format!("dwt{level}"),
            BandTag::ImfDwt { imf, level } => format!("imf{imf}_dwt{level}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub tag: BandTag,
    pub samples: Vec<f64>,
    /// Effective sample rate: the source rate, divided by 2 per DWT level.
    pub rate_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSet {
    pub bands: Vec<Band>,
    /// EMD residue or the discarded DWT approximation.
    pub residual: Option<Vec<f64>>,
    pub source_rate_hz: f64,
    pub notes: Vec<String>,
}

impl BandSet {
    pub fn tags(&self) -> Vec<BandTag> {
        self.bands.iter().map(|b| b.tag).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DwtConfig {
    pub wavelet: WaveletKind,
    pub levels: usize,
    pub keep_detail_levels: usize,
}

impl Default for DwtConfig {
    fn default() -> Self {
        DwtConfig { wavelet: WaveletKind::Db8, levels: 10, keep_detail_levels: 10 }
    }
}

impl DwtConfig {
    pub fn chained() -> Self {
        DwtConfig { levels: 5, keep_detail_levels: 5, ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.keep_detail_levels == 0 || self.keep_detail_levels > self.levels {
            return Err(Error::invalid(format!(
                "keep_detail_levels must be in 1..={} (got {})",
                self.levels, self.keep_detail_levels
            )));
        }
        Ok(())
    }
}

/// Decompose into detail bands 1..=keep_detail_levels. The final
/// approximation is stored as the residual and never used as a band.
pub fn dwt(signal: &[f64], rate_hz: f64, cfg: &DwtConfig) -> Result<BandSet> {
    cfg.validate()?;
    let bank = FilterBank::new(cfg.wavelet);
    let dec = wavelet::wavedec(signal, &bank, cfg.levels)?;
    let mut notes = Vec::new();
    if dec.skipped_levels > 0 {
        notes.push(format!(
            "dwt: stopped after {} of {} levels (signal shorter than filter)",
            dec.levels(),
            cfg.levels
        ));
    }
    let bands = dec
        .details
        .iter()
        .take(cfg.keep_detail_levels)
        .enumerate()
        .map(|(i, d)| Band {
            tag: BandTag::Dwt { level: i + 1 },
            samples: d.clone(),
            rate_hz: rate_hz / 2f64.powi(i as i32 + 1),
        })
        .collect();
    Ok(BandSet { bands, residual: Some(dec.approx), source_rate_hz: rate_hz, notes })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FirstStage {
    Emd,
    Eemd,
}

/// EMD or EEMD, then a DWT of each kept IMF; one band per (IMF, level).
pub fn chain_decompose(
    signal: &[f64],
    rate_hz: f64,
    first: FirstStage,
    emd_cfg: &EemdConfig,
    dwt_cfg: &DwtConfig,
) -> Result<BandSet> {
    let imf_set = match first {
        FirstStage::Emd => emd(signal, rate_hz, &emd_cfg.emd)?,
        FirstStage::Eemd => eemd(signal, rate_hz, emd_cfg)?,
    };
    let mut bands = Vec::new();
    let mut notes = imf_set.notes.clone();
    for imf in &imf_set.bands {
        let BandTag::Imf { index } = imf.tag else { unreachable!("EMD bands are IMFs") };
        let sub = dwt(&imf.samples, rate_hz, dwt_cfg)?;
        notes.extend(sub.notes.into_iter().map(|n| format!("imf{index} {n}")));
        for b in sub.bands {
            let BandTag::Dwt { level } = b.tag else { unreachable!("DWT bands are levels") };
            bands.push(Band { tag: BandTag::ImfDwt { imf: index, level }, ..b });
        }
    }
    Ok(BandSet { bands, residual: imf_set.residual, source_rate_hz: rate_hz, notes })
}

pub fn identity_decompose(signal: &[f64], rate_hz: f64) -> BandSet {
    BandSet {
        bands: vec![Band { tag: BandTag::Raw, samples: signal.to_vec(), rate_hz }],
        residual: None,
        source_rate_hz: rate_hz,
        notes: Vec::new(),
    }
}

/// The six decomposition choices of the experiment matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decomposition {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "emd")]
    Emd,
    #[serde(rename = "eemd")]
    Eemd,
    #[serde(rename = "dwt")]
    Dwt,
    #[serde(rename = "emd+dwt")]
    EmdDwt,
    #[serde(rename = "eemd+dwt")]
    EemdDwt,
}

impl Decomposition {
    pub const ALL: [Decomposition; 6] = [
        Decomposition::None,
        Decomposition::Emd,
        Decomposition::Eemd,
        Decomposition::Dwt,
        Decomposition::EmdDwt,
        Decomposition::EemdDwt,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Decomposition::None => "none",
            Decomposition::Emd => "emd",
            Decomposition::Eemd => "eemd",
            Decomposition::Dwt => "dwt",
            Decomposition::EmdDwt => "emd+dwt",
            Decomposition::EemdDwt => "eemd+dwt",
        }
    }

    pub fn is_chained(self) -> bool {
        matches!(self, Decomposition::EmdDwt | Decomposition::EemdDwt)
    }
}

impl fmt::Display for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Decomposition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Decomposition::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown decomposition `{s}` (expected none|emd|eemd|dwt|emd+dwt|eemd+dwt)"
                ))
            })
    }
}

/// Every decomposition parameter in one place.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct DecomposeConfig {
    pub eemd: EemdConfig,
    pub dwt: DwtConfig,
    pub chain_dwt: DwtConfigChained,
}

/// DWT settings used after EMD/EEMD (5 levels by default).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DwtConfigChained(pub DwtConfig);

impl Default for DwtConfigChained {
    fn default() -> Self {
        DwtConfigChained(DwtConfig::chained())
    }
}

/// Run `method` on one signal. `seed` overrides the EEMD seed so each cycle
/// gets its own noise stream.
pub fn decompose(
    signal: &[f64],
    rate_hz: f64,
    method: Decomposition,
    cfg: &DecomposeConfig,
    seed: u64,
) -> Result<BandSet> {
    let eemd_cfg = EemdConfig { seed, ..cfg.eemd.clone() };
    match method {
        Decomposition::None => Ok(identity_decompose(signal, rate_hz)),
        Decomposition::Emd => emd(signal, rate_hz, &cfg.eemd.emd),
        Decomposition::Eemd => eemd(signal, rate_hz, &eemd_cfg),
        Decomposition::Dwt => dwt(signal, rate_hz, &cfg.dwt),
        Decomposition::EmdDwt => chain_decompose(signal, rate_hz, FirstStage::Emd, &eemd_cfg, &cfg.chain_dwt.0),
        Decomposition::EemdDwt => chain_decompose(signal, rate_hz, FirstStage::Eemd, &eemd_cfg, &cfg.chain_dwt.0),
    }
}

#[derive(Serialize)]
struct BandSidecar<'a> {
    cycle_id: &'a str,
    source_rate_hz: f64,
    notes: &'a [String],
    bands: Vec<BandEntry>,
}

#[derive(Serialize)]
struct BandEntry {
    file: String,
    tag: BandTag,
    rate_hz: f64,
    len: usize,
}

/// Write each band as an LSC1 file plus a JSON provenance sidecar. LSC1 holds
/// an integer rate, so the exact effective rate is kept in the sidecar.
pub fn dump_bands(dir: &Path, cycle_id: &str, set: &BandSet) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut entries = Vec::new();
    for band in &set.bands {
        let file = format!("{cycle_id}.{}.lsc", band.tag.name());
        crate::ingest::store::write_lsc1(&dir.join(&file), &band.samples, band.rate_hz.round() as u32)?;
        entries.push(BandEntry { file, tag: band.tag, rate_hz: band.rate_hz, len: band.samples.len() });
    }
    let sidecar = BandSidecar {
        cycle_id,
        source_rate_hz: set.source_rate_hz,
        notes: &set.notes,
        bands: entries,
    };
    std::fs::write(dir.join(format!("{cycle_id}.bands.json")), serde_json::to_vec_pretty(&sidecar)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;
    use std::collections::HashSet;
    use std::f64::consts::PI;

    fn two_tone() -> Vec<f64> {
        (0..8000)
            .map(|i| {
                let t = i as f64 / 8000.0;
                (2.0 * PI * 50.0 * t).sin() + (2.0 * PI * 400.0 * t).sin()
            })
            .collect()
    }

    fn energy(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn identity_keeps_signal() {
        let x = vec![0.1, -0.4, 2.0];
        let bs = identity_decompose(&x, 8000.0);
        assert_eq!(bs.bands.len(), 1);
        assert_eq!(bs.bands[0].samples, x);
        assert_eq!(bs.bands[0].tag.name(), "raw");
    }

    #[test]
    fn dwt_bands_halve_in_length_and_rate() {
        let mut rng = rng_from_seed(2);
        let x: Vec<f64> = (0..40_000).map(|_| rng.random_range(-1.0..1.0)).collect();
        let bs = dwt(&x, 8000.0, &DwtConfig::default()).unwrap();
        assert_eq!(bs.bands.len(), 10);
        for (i, b) in bs.bands.iter().enumerate() {
            assert_eq!(b.tag, BandTag::Dwt { level: i + 1 });
            assert_eq!(b.rate_hz, 8000.0 / 2f64.powi(i as i32 + 1));
        }
        assert_eq!(bs.bands[0].samples.len(), 20_000);
        assert_eq!(bs.bands[9].samples.len(), 40);
        assert!(bs.notes.is_empty());
    }

    #[test]
    fn white_noise_detail_energy_falls_with_level() {
        let mut rng = rng_from_seed(4);
        let (mut e1, mut e10) = (0.0, 0.0);
        for _ in 0..50 {
            let x: Vec<f64> = (0..8192).map(|_| rng.random_range(-1.0..1.0)).collect();
            let bs = dwt(&x, 8000.0, &DwtConfig::default()).unwrap();
            e1 += energy(&bs.bands[0].samples);
            e10 += energy(&bs.bands[9].samples);
        }
        assert!(e1 > e10, "level1 {e1} level10 {e10}");
    }

    #[test]
    fn short_signal_records_early_stop() {
        let x: Vec<f64> = (0..300).map(|i| (i as f64).sin()).collect();
        let bs = dwt(&x, 8000.0, &DwtConfig::default()).unwrap();
        assert!(bs.bands.len() < 10);
        assert_eq!(bs.notes.len(), 1);
    }

    #[test]
    fn chain_has_unique_imf_level_tags() {
        let bs = chain_decompose(&two_tone(), 8000.0, FirstStage::Emd, &EemdConfig::default(), &DwtConfig::chained())
            .unwrap();
        let n_imfs = emd(&two_tone(), 8000.0, &EmdConfig::default()).unwrap().bands.len();
        assert_eq!(bs.bands.len(), 5 * n_imfs);
        assert!(bs.bands.len() <= 25);
        let tags: HashSet<_> = bs.tags().into_iter().collect();
        assert_eq!(tags.len(), bs.bands.len());
        assert!(bs.bands.iter().all(|b| matches!(b.tag, BandTag::ImfDwt { .. })));
    }

    #[test]
    fn noiseless_eemd_chain_equals_emd_chain() {
        let cfg = EemdConfig { ensembles: 1, noise_std_fraction: 0.0, ..Default::default() };
        let a = chain_decompose(&two_tone(), 8000.0, FirstStage::Emd, &cfg, &DwtConfig::chained()).unwrap();
        let b = chain_decompose(&two_tone(), 8000.0, FirstStage::Eemd, &cfg, &DwtConfig::chained()).unwrap();
        assert_eq!(a.bands, b.bands);
    }

    #[test]
    fn decomposition_names_round_trip() {
        for d in Decomposition::ALL {
            assert_eq!(d.as_str().parse::<Decomposition>().unwrap(), d);
        }
        assert!("wpt".parse::<Decomposition>().is_err());
    }
}
