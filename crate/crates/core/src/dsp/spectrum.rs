use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Magnitude-squared spectrum of a real frame, zero-padded to the next power
/// of two. Holds a reusable FFT plan.
#[derive(Clone)]
pub struct PowerSpectrum {
    fft_size: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PowerSpectrum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PowerSpectrum")
            .field("fft_size", &self.fft_size)
            .finish()
    }
}

impl PowerSpectrum {
    /// Plan for inputs of `input_len` samples.
    pub fn new(input_len: usize) -> Self {
        let fft_size = input_len.max(1).next_power_of_two();
        let fft = FftPlanner::new().plan_fft_forward(fft_size);
        Self { fft_size, fft }
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    /// Returns `fft_size / 2 + 1` bins; bin k lies at `k * fs / fft_size`.
    pub fn compute(&self, windowed: &[f64]) -> Vec<f64> {
        assert!(
            windowed.len() <= self.fft_size,
            "input longer than the planned FFT"
        );
        let mut buf: Vec<Complex64> = windowed
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
            .take(self.fft_size)
            .collect();
        self.fft.process(&mut buf);
        buf[..self.bins()].iter().map(|c| c.norm_sqr()).collect()
    }
}

/// One-shot convenience wrapper around [`PowerSpectrum`].
pub fn power_spectrum(windowed: &[f64]) -> Vec<f64> {
    PowerSpectrum::new(windowed.len()).compute(windowed)
}
