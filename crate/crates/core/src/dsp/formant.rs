use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::lpc::{lpc, LPC_ORDER};
use super::roots::{polynomial_roots, Complex};
use super::DspError;

/// Lowest accepted formant frequency.
const MIN_FORMANT_HZ: f64 = 90.0;
/// Widest accepted formant bandwidth.
const MAX_BANDWIDTH_HZ: f64 = 400.0;
/// Roots whose imaginary part is this small relative to their magnitude are
/// treated as real.
const REAL_ROOT_TOL: f64 = 1e-10;

/// First two formant frequencies in Hz; 0 marks an absent formant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FormantPair {
    pub f1: f64,
    pub f2: f64,
}

/// Reflects roots outside the unit circle to `1 / conj(r)`, keeping their
/// angle.
pub fn fix_roots(roots: &[Complex<f64>]) -> Vec<Complex<f64>> {
    roots
        .iter()
        .map(|&r| {
            if r.norm() > 1.0 {
                Complex::new(1.0, 0.0) / r.conj()
            } else {
                r
            }
        })
        .collect()
}

/// Picks the two lowest resonances among roots in the upper half plane,
/// discarding candidates below 90 Hz or wider than 400 Hz.
pub fn formants(roots: &[Complex<f64>], sample_rate: f64) -> FormantPair {
    let mut candidates: Vec<f64> = roots
        .iter()
        .filter(|r| r.im > REAL_ROOT_TOL * r.norm())
        .filter_map(|r| {
            let freq = r.arg() * sample_rate / (2.0 * PI);
            let bandwidth = -(sample_rate / PI) * r.norm().ln();
            (freq >= MIN_FORMANT_HZ && bandwidth <= MAX_BANDWIDTH_HZ && freq < sample_rate / 2.0)
                .then_some(freq)
        })
        .collect();
    candidates.sort_by(f64::total_cmp);
    FormantPair {
        f1: candidates.first().copied().unwrap_or(0.0),
        f2: candidates.get(1).copied().unwrap_or(0.0),
    }
}

/// Full per-frame chain: LPC of order 12, roots of the prediction polynomial,
/// unit-circle fixing and formant picking.
#[derive(Debug, Clone)]
pub struct FormantTracker {
    sample_rate: f64,
    order: usize,
}

impl FormantTracker {
    pub fn new(sample_rate: f64) -> Self {
        Self {
            sample_rate,
            order: LPC_ORDER,
        }
    }

    pub fn with_order(sample_rate: f64, order: usize) -> Self {
        Self { sample_rate, order }
    }

    /// Formants of a Hann-windowed frame.
    pub fn analyze(&self, windowed: &[f64]) -> Result<FormantPair, DspError> {
        let lpc = lpc(windowed, self.order)?;
        let roots = polynomial_roots(&lpc.polynomial())?;
        Ok(formants(&fix_roots(&roots), self.sample_rate))
    }
}
