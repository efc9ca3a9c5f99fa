use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::DspError;

/// 4-term Blackman-Harris (-92 dB) coefficients.
const BH4: [f64; 4] = [0.35875, 0.48829, 0.14128, 0.01168];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WindowKind {
    BlackmanHarris4,
    Hann,
}

/// Symmetric analysis window with precomputed coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowFunction {
    kind: WindowKind,
    coefficients: Vec<f64>,
}

impl WindowFunction {
    pub fn new(kind: WindowKind, length: usize) -> Self {
        assert!(length > 0, "window length must be positive");
        let denom = (length.max(2) - 1) as f64;
        let eval = |n: usize| {
            let x = 2.0 * PI * n as f64 / denom;
            match kind {
                WindowKind::Hann => 0.5 - 0.5 * x.cos(),
                WindowKind::BlackmanHarris4 => {
                    BH4[0] - BH4[1] * x.cos() + BH4[2] * (2.0 * x).cos() - BH4[3] * (3.0 * x).cos()
                }
            }
        };
        let mut coefficients = vec![0.0; length];
        // compute the first half and mirror it so the window is exactly symmetric
        for n in 0..length.div_ceil(2) {
            let w = eval(n);
            coefficients[n] = w;
            coefficients[length - 1 - n] = w;
        }
        if length == 1 {
            coefficients[0] = 1.0;
        }
        Self { kind, coefficients }
    }

    pub fn kind(&self) -> WindowKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }
}

/// Pointwise product of a frame and a window of the same length.
pub fn apply_window(frame: &[f64], window: &WindowFunction) -> Result<Vec<f64>, DspError> {
    if frame.len() != window.len() {
        return Err(DspError::LengthMismatch {
            expected: window.len(),
            actual: frame.len(),
        });
    }
    Ok(frame
        .iter()
        .zip(&window.coefficients)
        .map(|(x, w)| x * w)
        .collect())
}
