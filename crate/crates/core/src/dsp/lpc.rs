use super::DspError;

pub const LPC_ORDER: usize = 12;

/// Linear prediction `x[n] ≈ sum_k c_k x[n-k]`, i.e. `A(z) = 1 - sum_k c_k z^-k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpcResult {
    pub order: usize,
    pub coefficients: Vec<f64>,
    /// Residual (prediction error) energy.
    pub gain: f64,
}

impl LpcResult {
    /// Coefficients of `z^p A(z)` in descending powers: `[1, -c_1, ..., -c_p]`.
    pub fn polynomial(&self) -> Vec<f64> {
        std::iter::once(1.0)
            .chain(self.coefficients.iter().map(|c| -c))
            .collect()
    }
}

/// Autocorrelation-method LPC solved with the Levinson-Durbin recursion.
pub fn lpc(frame: &[f64], order: usize) -> Result<LpcResult, DspError> {
    let r: Vec<f64> = (0..=order)
        .map(|lag| {
            if lag >= frame.len() {
                0.0
            } else {
                frame[..frame.len() - lag]
                    .iter()
                    .zip(&frame[lag..])
                    .map(|(a, b)| a * b)
                    .sum()
            }
        })
        .collect();
    if r[0] <= 0.0 || !r[0].is_finite() {
        return Err(DspError::DegenerateFrame);
    }

    // a holds A(z) = 1 + sum a_k z^-k
    let mut a = vec![0.0; order + 1];
    a[0] = 1.0;
    let mut err = r[0];
    let mut scratch = vec![0.0; order + 1];
    for i in 1..=order {
        if err <= r[0] * 1e-15 {
            break;
        }
        let acc: f64 = r[i] + (1..i).map(|j| a[j] * r[i - j]).sum::<f64>();
        let k = -acc / err;
        scratch[..=i].copy_from_slice(&a[..=i]);
        for j in 1..i {
            a[j] = scratch[j] + k * scratch[i - j];
        }
        a[i] = k;
        err *= 1.0 - k * k;
    }

    Ok(LpcResult {
        order,
        coefficients: a[1..].iter().map(|v| -v).collect(),
        gain: err.max(0.0),
    })
}
