use std::f64::consts::PI;

use super::spectrum::PowerSpectrum;
use super::DspError;

pub const MFCC_COUNT: usize = 13;

#[derive(Debug, Clone, PartialEq)]
pub struct MfccConfig {
    pub sample_rate: f64,
    pub frame_len: usize,
    pub mel_bands: usize,
    pub coefficients: usize,
    pub low_hz: f64,
    pub high_hz: f64,
    pub log_floor: f64,
}

impl Default for MfccConfig {
    fn default() -> Self {
        Self {
            sample_rate: 16_000.0,
            frame_len: 400,
            mel_bands: 40,
            coefficients: MFCC_COUNT,
            low_hz: 20.0,
            high_hz: 7800.0,
            log_floor: 1e-10,
        }
    }
}

pub(crate) fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub(crate) fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

#[derive(Debug, Clone)]
struct MelFilter {
    first_bin: usize,
    weights: Vec<f64>,
}

/// MFCC extractor: power spectrum, triangular mel filterbank, log, and an
/// orthonormal DCT-II truncated to the first coefficients (c0 included).
#[derive(Debug, Clone)]
pub struct Mfcc {
    config: MfccConfig,
    spectrum: PowerSpectrum,
    filters: Vec<MelFilter>,
    dct: Vec<Vec<f64>>,
}

impl Mfcc {
    pub fn new(config: MfccConfig) -> Self {
        let spectrum = PowerSpectrum::new(config.frame_len);
        let fft_size = spectrum.fft_size() as f64;
        let bins = spectrum.bins();
        let (mel_lo, mel_hi) = (hz_to_mel(config.low_hz), hz_to_mel(config.high_hz));
        let step = (mel_hi - mel_lo) / (config.mel_bands + 1) as f64;
        let edges: Vec<f64> = (0..config.mel_bands + 2)
            .map(|i| mel_to_hz(mel_lo + step * i as f64))
            .collect();

        let filters = edges
            .windows(3)
            .map(|e| {
                let (lo, centre, hi) = (e[0], e[1], e[2]);
                let mut first_bin = None;
                let mut weights = Vec::new();
                for k in 0..bins {
                    let f = k as f64 * config.sample_rate / fft_size;
                    let w = if f > lo && f <= centre {
                        (f - lo) / (centre - lo)
                    } else if f > centre && f < hi {
                        (hi - f) / (hi - centre)
                    } else {
                        0.0
                    };
                    if w > 0.0 {
                        first_bin.get_or_insert(k);
                        weights.push(w);
                    } else if first_bin.is_some() {
                        break;
                    }
                }
                let area: f64 = weights.iter().sum();
                assert!(area > 0.0, "mel filter covers no FFT bin");
                weights.iter_mut().for_each(|w| *w /= area);
                MelFilter {
                    first_bin: first_bin.unwrap_or(0),
                    weights,
                }
            })
            .collect();

        let m = config.mel_bands as f64;
        let dct = (0..config.coefficients)
            .map(|k| {
                let scale = if k == 0 { (1.0 / m).sqrt() } else { (2.0 / m).sqrt() };
                (0..config.mel_bands)
                    .map(|n| scale * (PI * k as f64 * (n as f64 + 0.5) / m).cos())
                    .collect()
            })
            .collect();

        Self {
            config,
            spectrum,
            filters,
            dct,
        }
    }

    pub fn config(&self) -> &MfccConfig {
        &self.config
    }

    /// Natural-log mel band energies of an already windowed frame.
    pub fn log_mel_energies(&self, windowed: &[f64]) -> Result<Vec<f64>, DspError> {
        if windowed.len() != self.config.frame_len {
            return Err(DspError::LengthMismatch {
                expected: self.config.frame_len,
                actual: windowed.len(),
            });
        }
        let power = self.spectrum.compute(windowed);
        Ok(self
            .filters
            .iter()
            .map(|f| {
                let e: f64 = f
                    .weights
                    .iter()
                    .zip(&power[f.first_bin..])
                    .map(|(w, p)| w * p)
                    .sum();
                e.max(self.config.log_floor).ln()
            })
            .collect())
    }

    /// Cepstral coefficients from precomputed log energies.
    pub fn cepstrum(&self, log_energies: &[f64]) -> Vec<f64> {
        self.dct
            .iter()
            .map(|row| row.iter().zip(log_energies).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// MFCCs of a frame windowed with Blackman-Harris upstream.
    pub fn compute(&self, windowed: &[f64]) -> Result<Vec<f64>, DspError> {
        Ok(self.cepstrum(&self.log_mel_energies(windowed)?))
    }
}

impl Default for Mfcc {
    fn default() -> Self {
        Self::new(MfccConfig::default())
    }
}
