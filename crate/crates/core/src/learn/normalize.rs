use serde::{Deserialize, Serialize};

use super::LearnError;

/// Per-dimension z-score parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizerStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormalizerStats {
    /// Pass-through statistics (mean 0, std 1).
    pub fn identity(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }

    pub fn dimension(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>, LearnError> {
        if x.len() != self.mean.len() {
            return Err(LearnError::DimensionMismatch {
                expected: self.mean.len(),
                got: x.len(),
            });
        }
        Ok(x
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect())
    }

    /// Inverse of [`transform`](Self::transform).
    pub fn restore(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| v * s + m)
            .collect()
    }
}

/// Per-dimension mean and population standard deviation. Dimensions without
/// variance get a standard deviation of 1, so they map to 0.
pub fn fit_normalizer(rows: &[Vec<f64>]) -> Result<NormalizerStats, LearnError> {
    if rows.len() < 2 {
        return Err(LearnError::TooFewSamples {
            got: rows.len(),
            required: 2,
        });
    }
    let dim = rows[0].len();
    if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
        return Err(LearnError::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(LearnError::NonFinite);
    }
    let n = rows.len() as f64;
    // accumulate relative to the first row so constant columns are exact
    let origin = &rows[0];
    let mut mean = vec![0.0; dim];
    for r in rows {
        for ((m, v), o) in mean.iter_mut().zip(r).zip(origin) {
            *m += v - o;
        }
    }
    for (m, o) in mean.iter_mut().zip(origin) {
        *m = o + *m / n;
    }
    let mut var = vec![0.0; dim];
    for r in rows {
        for ((acc, v), m) in var.iter_mut().zip(r).zip(&mean) {
            *acc += (v - m) * (v - m);
        }
    }
    let std = var
        .into_iter()
        .enumerate()
        .map(|(d, v)| {
            let s = (v / n).sqrt();
            let constant = rows.iter().all(|r| r[d] == rows[0][d]);
            if constant || s <= f64::EPSILON * mean[d].abs() || s == 0.0 {
                1.0
            } else {
                s
            }
        })
        .collect();
    Ok(NormalizerStats { mean, std })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn symmetric_pair() {
        let s = fit_normalizer(&[vec![0.0, 0.0], vec![2.0, 2.0]]).unwrap();
        assert_eq!(s.mean, vec![1.0, 1.0]);
        assert_eq!(s.std, vec![1.0, 1.0]);
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let rows = vec![vec![0.1, 1.0], vec![0.1, 3.0], vec![0.1, 5.0]];
        let s = fit_normalizer(&rows).unwrap();
        assert_eq!(s.std[0], 1.0);
        for r in &rows {
            assert_eq!(s.transform(r).unwrap()[0], 0.0);
        }
    }

    #[test]
    fn single_row_is_rejected() {
        assert!(matches!(
            fit_normalizer(&[vec![1.0]]),
            Err(LearnError::TooFewSamples { got: 1, .. })
        ));
    }

    #[test]
    fn dimension_checked() {
        let s = NormalizerStats::identity(3);
        assert!(matches!(
            s.transform(&[1.0]),
            Err(LearnError::DimensionMismatch { expected: 3, got: 1 })
        ));
    }

    proptest! {
        #[test]
        fn normalized_data_is_standardized(
            rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 4), 3..40)
        ) {
            let s = fit_normalizer(&rows).unwrap();
            let z: Vec<Vec<f64>> = rows.iter().map(|r| s.transform(r).unwrap()).collect();
            let n = z.len() as f64;
            for d in 0..4 {
                let mean = z.iter().map(|r| r[d]).sum::<f64>() / n;
                let var = z.iter().map(|r| (r[d] - mean).powi(2)).sum::<f64>() / n;
                prop_assert!(mean.abs() < 1e-9);
                if s.std[d] != 1.0 || var > 0.0 {
                    prop_assert!((var.sqrt() - 1.0).abs() < 1e-9, "std {}", var.sqrt());
                }
            }
            for r in &rows {
                let back = s.restore(&s.transform(r).unwrap());
                for (a, b) in r.iter().zip(&back) {
                    prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
                }
            }
        }
    }
}
