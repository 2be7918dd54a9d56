//! Deterministic hand-crafted ECG embedding.
//!
//! Stands in for a learned encoder: a fixed feature vector per record is
//! projected to `d` dimensions with a seeded Gaussian matrix and L2
//! normalized. Feature layout, for `C` leads and `B = band_edges_hz.len() - 1`
//! bands:
//!
//! ```text
//! per lead (in lead order), 6 + B values:
//!   mean, std, min, max, rms, zero-crossing rate, relative band power × B
//! then 2 global values from lead 0:
//!   heart rate (bpm, 0 when < 2 R peaks), RR-interval std (ms)
//! ```

mod peaks;
mod spectrum;

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::corpus::{EcgRecord, Embedding};
use crate::error::{Error, Result};

pub use peaks::{detect_r_peaks, rhythm_stats, RhythmStats};
pub use spectrum::relative_band_powers;

/// Number of per-lead features before the band powers.
pub const LEAD_MOMENT_FEATURES: usize = 6;
/// Global features appended after the per-lead blocks.
pub const GLOBAL_FEATURES: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturizerConfig {
    pub d: usize,
    pub projection_seed: u64,
    pub band_edges_hz: Vec<f64>,
    pub peak_refractory_ms: f64,
}

impl Default for FeaturizerConfig {
    fn default() -> Self {
        Self {
            d: 768,
            projection_seed: 42,
            band_edges_hz: vec![0.5, 4.0, 8.0, 15.0, 30.0, 45.0],
            peak_refractory_ms: 200.0,
        }
    }
}

impl FeaturizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Config("featurizer d must be >= 1".into()));
        }
        if self.band_edges_hz.len() < 2 {
            return Err(Error::Config("need at least two band edges".into()));
        }
        if self.band_edges_hz.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::Config("band edges must be finite and >= 0".into()));
        }
        if self.band_edges_hz.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("band edges must be strictly increasing".into()));
        }
        if !(self.peak_refractory_ms.is_finite() && self.peak_refractory_ms > 0.0) {
            return Err(Error::Config("peak_refractory_ms must be positive".into()));
        }
        Ok(())
    }

    pub fn n_bands(&self) -> usize {
        self.band_edges_hz.len() - 1
    }

    /// Raw feature count for a record with `n_leads` leads.
    pub fn feature_len(&self, n_leads: usize) -> usize {
        n_leads * (LEAD_MOMENT_FEATURES + self.n_bands()) + GLOBAL_FEATURES
    }

    fn check_rate(&self, sample_rate_hz: f64) -> Result<()> {
        let top = self.band_edges_hz.last().copied().unwrap_or(0.0);
        if sample_rate_hz <= 2.0 * top {
            return Err(Error::Config(format!(
                "sample rate {sample_rate_hz} Hz must exceed twice the top band edge ({top} Hz)"
            )));
        }
        Ok(())
    }
}

/// Per-lead moments, in feature order.
fn lead_moments(x: &[f32]) -> [f64; LEAD_MOMENT_FEATURES] {
    let n = x.len() as f64;
    let mean = x.iter().map(|&v| v as f64).sum::<f64>() / n;
    let var = x.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n;
    let min = x.iter().fold(f64::INFINITY, |m, &v| m.min(v as f64));
    let max = x.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v as f64));
    let rms = (x.iter().map(|&v| (v as f64).powi(2)).sum::<f64>() / n).sqrt();
    let crossings = x
        .windows(2)
        .filter(|w| (w[0] as f64 - mean) * (w[1] as f64 - mean) < 0.0)
        .count();
    let zcr = if x.len() > 1 {
        crossings as f64 / (x.len() - 1) as f64
    } else {
        0.0
    };
    [mean, var.sqrt(), min, max, rms, zcr]
}

/// Computes the raw feature vector described in the module docs.
pub fn raw_features(record: &EcgRecord, cfg: &FeaturizerConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    cfg.check_rate(record.sample_rate_hz)?;
    let mut out = Vec::with_capacity(cfg.feature_len(record.n_leads));
    let mut lead0 = Vec::new();
    for lead in 0..record.n_leads {
        let x = record.lead(lead);
        out.extend_from_slice(&lead_moments(&x));
        out.extend(relative_band_powers(
            &x,
            record.sample_rate_hz,
            &cfg.band_edges_hz,
        ));
        if lead == 0 {
            lead0 = x;
        }
    }
    let peaks = detect_r_peaks(&lead0, record.sample_rate_hz, cfg.peak_refractory_ms);
    let rhythm = rhythm_stats(&peaks, record.sample_rate_hz);
    out.push(rhythm.heart_rate_bpm);
    out.push(rhythm.rr_std_ms);
    Ok(out)
}

/// Seeded `d × n_features` Gaussian matrix, row-major. Entries are standard
/// normal draws from ChaCha8 seeded with `seed_from_u64(seed)`, generated row
/// by row.
pub fn projection_matrix(seed: u64, d: usize, n_features: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..d * n_features)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Embedding provider with a per-feature-count projection cache.
#[derive(Debug)]
pub struct Featurizer {
    cfg: FeaturizerConfig,
    projections: RwLock<HashMap<usize, Arc<Vec<f64>>>>,
}

impl Featurizer {
    pub fn new(cfg: FeaturizerConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            projections: RwLock::new(HashMap::new()),
        })
    }

    pub fn config(&self) -> &FeaturizerConfig {
        &self.cfg
    }

    fn projection(&self, n_features: usize) -> Arc<Vec<f64>> {
        if let Some(p) = self.projections.read().unwrap().get(&n_features) {
            return Arc::clone(p);
        }
        let mut cache = self.projections.write().unwrap();
        Arc::clone(cache.entry(n_features).or_insert_with(|| {
            Arc::new(projection_matrix(
                self.cfg.projection_seed,
                self.cfg.d,
                n_features,
            ))
        }))
    }

    pub fn embed(&self, record: &EcgRecord) -> Result<Embedding> {
        let features = raw_features(record, &self.cfg)?;
        if features.iter().all(|&f| f == 0.0) {
            return Err(Error::DegenerateSignal(format!(
                "record {:?} has an all-zero feature vector",
                record.id
            )));
        }
        let proj = self.projection(features.len());
        let mut z: Vec<f64> = proj
            .chunks_exact(features.len())
            .map(|row| row.iter().zip(&features).map(|(p, f)| p * f).sum())
            .collect();
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::DegenerateSignal(format!(
                "record {:?} projects to a zero vector",
                record.id
            )));
        }
        z.iter_mut().for_each(|v| *v /= norm);
        Ok(Embedding {
            id: record.id.clone(),
            vector: z.into_iter().map(|v| v as f32).collect(),
        })
    }
}

/// One-shot embedding; builds the projection for this call only.
pub fn embed(record: &EcgRecord, cfg: &FeaturizerConfig) -> Result<Embedding> {
    Featurizer::new(cfg.clone())?.embed(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::l2_norm;

    fn record(leads: &[Vec<f32>], fs: f64) -> EcgRecord {
        let n = leads[0].len();
        let mut sig = Vec::with_capacity(n * leads.len());
        for t in 0..n {
            for l in leads {
                sig.push(l[t]);
            }
        }
        EcgRecord::new("r", sig, leads.len(), fs).unwrap()
    }

    /// Pseudo-random 12-lead test signal with a beat every 0.8 s.
    fn twelve_lead(seed: u64) -> EcgRecord {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fs = 250.0;
        let leads: Vec<Vec<f32>> = (0..12)
            .map(|l| {
                let f = 1.0 + l as f64 * 0.7;
                (0..2500)
                    .map(|t| {
                        let s = t as f64 / fs;
                        let beat = if t % 200 < 3 { 1.5 } else { 0.0 };
                        ((2.0 * std::f64::consts::PI * f * s).sin() * 0.3
                            + beat
                            + rng.random_range(-0.05..0.05)) as f32
                    })
                    .collect()
            })
            .collect();
        record(&leads, fs)
    }

    #[test]
    fn constant_lead_moments() {
        let r = record(&[vec![5.0; 1000]], 500.0);
        let f = raw_features(&r, &FeaturizerConfig::default()).unwrap();
        assert_eq!(f.len(), FeaturizerConfig::default().feature_len(1));
        assert_eq!(f[0], 5.0);
        assert_eq!(f[1], 0.0);
        assert_eq!(f[5], 0.0);
    }

    #[test]
    fn identical_leads_identical_blocks() {
        let lead: Vec<f32> = (0..1000).map(|t| ((t as f32) * 0.05).sin()).collect();
        let r = record(&[lead.clone(), lead], 500.0);
        let cfg = FeaturizerConfig::default();
        let f = raw_features(&r, &cfg).unwrap();
        let block = LEAD_MOMENT_FEATURES + cfg.n_bands();
        assert_eq!(f[..block], f[block..2 * block]);
    }

    #[test]
    fn sample_rate_must_exceed_nyquist_of_bands() {
        let r = record(&[vec![1.0; 100]], 80.0);
        assert!(matches!(
            raw_features(&r, &FeaturizerConfig::default()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn config_validation() {
        let mut cfg = FeaturizerConfig::default();
        cfg.band_edges_hz = vec![1.0, 1.0, 2.0];
        assert!(cfg.validate().is_err());
        cfg = FeaturizerConfig::default();
        cfg.d = 0;
        assert!(cfg.validate().is_err());
        cfg = FeaturizerConfig::default();
        cfg.peak_refractory_ms = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn embedding_is_unit_and_deterministic() {
        let r = twelve_lead(1);
        let cfg = FeaturizerConfig::default();
        let a = embed(&r, &cfg).unwrap();
        let b = Featurizer::new(cfg.clone()).unwrap().embed(&r).unwrap();
        assert_eq!(a.dim(), 768);
        assert!((l2_norm(&a.vector) - 1.0).abs() <= 1e-5);
        let bits = |e: &Embedding| e.vector.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn different_seeds_decorrelate() {
        let r = twelve_lead(7);
        let mut cfg = FeaturizerConfig::default();
        let a = embed(&r, &cfg).unwrap();
        cfg.projection_seed = 43;
        let b = embed(&r, &cfg).unwrap();
        let cos: f64 = a
            .vector
            .iter()
            .zip(&b.vector)
            .map(|(x, y)| *x as f64 * *y as f64)
            .sum();
        assert!(cos < 0.99, "cosine {cos}");
    }

    #[test]
    fn all_zero_signal_is_degenerate() {
        let r = record(&[vec![0.0; 500], vec![0.0; 500]], 500.0);
        assert!(matches!(
            embed(&r, &FeaturizerConfig::default()),
            Err(Error::DegenerateSignal(_))
        ));
    }

    #[test]
    fn projection_is_seed_stable() {
        let a = projection_matrix(42, 4, 3);
        let b = projection_matrix(42, 4, 3);
        assert_eq!(a, b);
        assert_ne!(a, projection_matrix(43, 4, 3));
        // Generation is row-major: a taller matrix extends a shorter one.
        assert_eq!(a[..], projection_matrix(42, 5, 3)[..12]);
    }
}
