//! Per-frame signal processing primitives.
//!
//! Everything here is a pure function of its inputs; the structs that hold
//! precomputed tables (windows, filterbanks, FFT plans) are immutable after
//! construction and can be shared between threads.

mod formant;
mod lpc;
mod mfcc;
mod pitch;
mod roots;
mod savgol;
mod spectrum;
mod window;

use thiserror::Error;

pub use formant::{fix_roots, formants, FormantPair, FormantTracker};
pub use lpc::{lpc, LpcResult, LPC_ORDER};
pub use mfcc::{Mfcc, MfccConfig, MFCC_COUNT};
pub use pitch::{PitchYinFft, YinConfig};
pub use roots::{polynomial_roots, Complex};
pub use savgol::{savitzky_golay, savitzky_golay_at, SavitzkyGolayFilter};
pub use spectrum::{power_spectrum, PowerSpectrum};
pub use window::{apply_window, WindowFunction, WindowKind};

#[derive(Debug, Error, PartialEq)]
pub enum DspError {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("series of length {len} is shorter than the filter length {required}")]
    SeriesTooShort { len: usize, required: usize },
    #[error("frame has zero energy")]
    DegenerateFrame,
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),
    #[error("root finding did not converge (worst relative residual {residual:e})")]
    NumericalFailure { residual: f64 },
    #[error("invalid filter: {0}")]
    InvalidFilter(String),
}
