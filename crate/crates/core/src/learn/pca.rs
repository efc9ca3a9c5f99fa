use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::LearnError;

pub const DEFAULT_PCA_EPSILON: f64 = 0.95;

/// Slack on the cumulative ratio so `epsilon = 1` keeps a full basis despite
/// rounding in the running sum.
const RATIO_SLACK: f64 = 1e-12;

/// Projection onto the leading principal directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaTransform {
    pub epsilon: f64,
    pub mean: Vec<f64>,
    /// `k` rows of length `d`, one per retained direction.
    pub basis: Vec<Vec<f64>>,
    /// Retained variances, non-increasing.
    pub eigenvalues: Vec<f64>,
    /// Sum of all eigenvalues, retained or not.
    pub total_variance: f64,
}

impl PcaTransform {
    pub fn input_dimension(&self) -> usize {
        self.mean.len()
    }

    pub fn output_dimension(&self) -> usize {
        self.basis.len()
    }

    /// Fraction of the total variance kept by the retained directions.
    pub fn retained_ratio(&self) -> f64 {
        self.eigenvalues.iter().sum::<f64>() / self.total_variance
    }

    /// `y = B (x - mean)`.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>, LearnError> {
        if x.len() != self.mean.len() {
            return Err(LearnError::DimensionMismatch {
                expected: self.mean.len(),
                got: x.len(),
            });
        }
        Ok(self
            .basis
            .iter()
            .map(|row| {
                row.iter()
                    .zip(x.iter().zip(&self.mean))
                    .map(|(b, (v, m))| b * (v - m))
                    .sum()
            })
            .collect())
    }

    /// `B^T y + mean`.
    pub fn reconstruct(&self, y: &[f64]) -> Vec<f64> {
        let mut x = self.mean.clone();
        for (row, c) in self.basis.iter().zip(y) {
            for (xi, b) in x.iter_mut().zip(row) {
                *xi += b * c;
            }
        }
        x
    }
}

/// Smallest `k` whose leading eigenvalues carry at least `epsilon` of the
/// total. Eigenvalues must be sorted in non-increasing order.
pub fn retained_components(eigenvalues: &[f64], epsilon: f64) -> usize {
    let total: f64 = eigenvalues.iter().sum();
    let mut acc = 0.0;
    for (i, l) in eigenvalues.iter().enumerate() {
        acc += l;
        if acc / total >= epsilon - RATIO_SLACK {
            return i + 1;
        }
    }
    eigenvalues.len()
}

/// Eigendecomposition of the sample covariance, keeping the fewest
/// directions that explain `epsilon` of the variance.
pub fn fit_pca(rows: &[Vec<f64>], epsilon: f64) -> Result<PcaTransform, LearnError> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(LearnError::InvalidParams(format!(
            "PCA epsilon {epsilon} outside (0, 1]"
        )));
    }
    if rows.len() < 2 {
        return Err(LearnError::TooFewSamples {
            got: rows.len(),
            required: 2,
        });
    }
    let d = rows[0].len();
    if let Some(bad) = rows.iter().find(|r| r.len() != d) {
        return Err(LearnError::DimensionMismatch {
            expected: d,
            got: bad.len(),
        });
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(LearnError::NonFinite);
    }
    let n = rows.len() as f64;
    let mut mean = vec![0.0; d];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);

    let mut cov = DMatrix::<f64>::zeros(d, d);
    let mut centered = vec![0.0; d];
    for r in rows {
        for ((c, v), m) in centered.iter_mut().zip(r).zip(&mean) {
            *c = v - m;
        }
        for i in 0..d {
            let ci = centered[i];
            if ci == 0.0 {
                continue;
            }
            for j in i..d {
                cov[(i, j)] += ci * centered[j];
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            let v = cov[(i, j)] / (n - 1.0);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }

    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let total: f64 = values.iter().sum();
    if !(total > 0.0) {
        return Err(LearnError::DegenerateCovariance);
    }
    let k = retained_components(&values, epsilon);
    let basis = order[..k]
        .iter()
        .map(|&i| {
            let col = eig.eigenvectors.column(i);
            // fix the sign so the largest-magnitude component is positive
            let pivot = col
                .iter()
                .copied()
                .max_by(|a, b| a.abs().total_cmp(&b.abs()))
                .unwrap_or(1.0);
            let s = if pivot < 0.0 { -1.0 } else { 1.0 };
            col.iter().map(|v| v * s).collect()
        })
        .collect();
    Ok(PcaTransform {
        epsilon,
        mean,
        basis,
        eigenvalues: values[..k].to_vec(),
        total_variance: total,
    })
}
