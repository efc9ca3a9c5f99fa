use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::window::{WindowFunction, WindowKind};

#[derive(Debug, Clone, PartialEq)]
pub struct YinConfig {
    pub sample_rate: f64,
    pub frame_len: usize,
    /// Absolute threshold on the cumulative mean normalized difference.
    pub threshold: f64,
    /// The global minimum is accepted below this value when no dip crosses
    /// `threshold`.
    pub fallback_threshold: f64,
    pub min_hz: f64,
    pub max_hz: f64,
}

impl Default for YinConfig {
    fn default() -> Self {
        Self {
            sample_rate: 16_000.0,
            frame_len: 400,
            threshold: 0.15,
            fallback_threshold: 0.5,
            min_hz: 40.0,
            max_hz: 600.0,
        }
    }
}

/// Yin pitch estimator evaluated in the frequency domain.
///
/// The frame arrives Hann-windowed. The difference function is the
/// window-weighted mean squared difference
/// `d(τ) = Σ w_j w_{j+τ} (s_j - s_{j+τ})² / Σ w_j w_{j+τ}` of the underlying
/// signal `s`, assembled from three FFT correlations. It is zero at the period
/// of a periodic signal regardless of the taper. Lags are limited to 3/5 of
/// the frame where the weight mass is still reasonable; with 25 ms frames the
/// lowest detectable pitch is about 67 Hz.
#[derive(Clone)]
pub struct PitchYinFft {
    config: YinConfig,
    fft_size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    window: Vec<f64>,
    window_spectrum: Vec<Complex64>,
    window_acf: Vec<f64>,
    tau_min: usize,
    tau_max: usize,
}

impl std::fmt::Debug for PitchYinFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PitchYinFft")
            .field("config", &self.config)
            .field("tau_min", &self.tau_min)
            .field("tau_max", &self.tau_max)
            .finish()
    }
}

impl PitchYinFft {
    pub fn new(config: YinConfig) -> Self {
        let n = config.frame_len;
        let fft_size = (2 * n).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(fft_size);
        let inverse = planner.plan_fft_inverse(fft_size);

        let window = WindowFunction::new(WindowKind::Hann, n).coefficients().to_vec();
        let window_acf = (0..n)
            .map(|lag| {
                window[..n - lag]
                    .iter()
                    .zip(&window[lag..])
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
            })
            .collect();
        let mut window_spectrum = padded(&window, fft_size);
        forward.process(&mut window_spectrum);

        let tau_min = ((config.sample_rate / config.max_hz).floor() as usize).max(2);
        let tau_max = ((config.sample_rate / config.min_hz).ceil() as usize)
            .min(n * 3 / 5)
            .max(tau_min + 1);
        Self {
            config,
            fft_size,
            forward,
            inverse,
            window,
            window_spectrum,
            window_acf,
            tau_min,
            tau_max,
        }
    }

    pub fn config(&self) -> &YinConfig {
        &self.config
    }

    /// Cumulative mean normalized difference for lags `0..=tau_max + 1`.
    pub fn cmndf(&self, windowed: &[f64]) -> Vec<f64> {
        let n = self.config.frame_len;
        assert_eq!(windowed.len(), n, "frame length mismatch");
        let last = (self.tau_max + 1).min(n - 1);

        // weighted signal energy w_j s_j^2 = x_j^2 / w_j
        let energy: Vec<f64> = windowed
            .iter()
            .zip(&self.window)
            .map(|(&x, &w)| if w > 0.0 { x * x / w } else { 0.0 })
            .collect();
        let mut spec_x = padded(windowed, self.fft_size);
        let mut spec_e = padded(&energy, self.fft_size);
        self.forward.process(&mut spec_x);
        self.forward.process(&mut spec_e);
        let mut corr: Vec<Complex64> = spec_x
            .iter()
            .zip(&spec_e)
            .zip(&self.window_spectrum)
            .map(|((x, e), w)| {
                let cross = e.conj() * w;
                Complex64::new(2.0 * cross.re - 2.0 * x.norm_sqr(), 0.0)
            })
            .collect();
        self.inverse.process(&mut corr);
        let scale = 1.0 / self.fft_size as f64;

        let mut out = vec![1.0; last + 1];
        if windowed.iter().all(|&x| x == 0.0) {
            return out;
        }
        let mut running = 0.0;
        for tau in 1..=last {
            let diff = (corr[tau].re * scale / self.window_acf[tau]).max(0.0);
            running += diff;
            out[tau] = if running > 0.0 {
                diff * tau as f64 / running
            } else {
                1.0
            };
        }
        out
    }

    /// Pitch in Hz of a Hann-windowed frame, 0 when unvoiced.
    pub fn estimate(&self, windowed: &[f64]) -> f64 {
        if windowed.iter().all(|&x| x == 0.0) {
            return 0.0;
        }
        let d = self.cmndf(windowed);
        let hi = self.tau_max.min(d.len() - 2);
        let lo = self.tau_min;

        let mut chosen = None;
        let mut tau = lo;
        while tau <= hi {
            if d[tau] < self.config.threshold {
                while tau < hi && d[tau + 1] < d[tau] {
                    tau += 1;
                }
                chosen = Some(tau);
                break;
            }
            tau += 1;
        }
        let tau = match chosen {
            Some(t) => t,
            None => {
                let (t, &v) = d[lo..=hi]
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .expect("non-empty lag range");
                if v >= self.config.fallback_threshold {
                    return 0.0;
                }
                lo + t
            }
        };

        let (y0, y1, y2) = (d[tau - 1], d[tau], d[tau + 1]);
        let denom = y0 - 2.0 * y1 + y2;
        let shift = if denom.abs() > 1e-12 {
            (0.5 * (y0 - y2) / denom).clamp(-1.0, 1.0)
        } else {
            0.0
        };
        self.config.sample_rate / (tau as f64 + shift)
    }
}

fn padded(x: &[f64], size: usize) -> Vec<Complex64> {
    x.iter()
        .map(|&v| Complex64::new(v, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(size)
        .collect()
}

impl Default for PitchYinFft {
    fn default() -> Self {
        Self::new(YinConfig::default())
    }
}
