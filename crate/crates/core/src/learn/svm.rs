use std::collections::{HashMap, VecDeque};
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use super::LearnError;
use crate::featset::FeatureKind;

/// `exp(-gamma * |a - b|^2)`.
pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// Soft-margin penalty `c`, SMO stopping tolerance `eps` and RBF width
/// `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmHyperParams {
    pub c: f64,
    pub eps: f64,
    pub gamma: f64,
}

impl SvmHyperParams {
    pub fn new(c: f64, eps: f64, gamma: f64) -> Result<Self, LearnError> {
        let p = Self { c, eps, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), LearnError> {
        for (name, v) in [("C", self.c), ("eps", self.eps), ("gamma", self.gamma)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(LearnError::InvalidParams(format!("{name} = {v} must be positive")));
            }
        }
        Ok(())
    }

    /// Shipped defaults per feature set.
    pub fn default_for(kind: FeatureKind) -> Self {
        let (c, eps, gamma) = match kind {
            FeatureKind::Mfcc => (1.0, 0.5, 0.005),
            FeatureKind::MfccDelta => (1.0, 0.1, 0.005),
            FeatureKind::StackedMfcc => (1.0, 0.5, 0.005),
            FeatureKind::FormantSd => (5.0, 0.005, 0.05),
            FeatureKind::StackedFormants => (1.0, 0.5, 0.05),
            FeatureKind::Pitch => (5.0, 0.005, 0.05),
            FeatureKind::StackedPitch => (5.0, 0.5, 0.05),
        };
        Self { c, eps, gamma }
    }
}

/// Resource limits for the solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoOptions {
    /// Budget of kernel evaluations not served from the cache.
    pub max_kernel_evaluations: u64,
    /// Iteration cap; 0 selects `max(10^7, 100 n)`.
    pub max_iterations: u64,
    /// Memory for cached kernel rows.
    pub cache_bytes: usize,
}

impl Default for SmoOptions {
    fn default() -> Self {
        Self {
            max_kernel_evaluations: 10_000_000,
            max_iterations: 0,
            cache_bytes: 512 << 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub iterations: u64,
    pub kernel_evaluations: u64,
    /// Maximal KKT violation `m(a) - M(a)` at termination.
    pub kkt_gap: f64,
    pub support_vectors: usize,
    pub bounded_support_vectors: usize,
    /// Dual variables of all training samples, in input order.
    pub alphas: Vec<f64>,
}

/// Trained RBF decision function `f(x) = sum_i w_i K(s_i, x) + bias`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    dimension: usize,
    /// Row-major, `support_count x dimension`.
    support_vectors: Vec<f64>,
    /// `alpha_i * y_i` per support vector.
    coefficients: Vec<f64>,
    bias: f64,
    gamma: f64,
}

impl SvmModel {
    pub fn new(
        support_vectors: Vec<Vec<f64>>,
        coefficients: Vec<f64>,
        bias: f64,
        gamma: f64,
    ) -> Result<Self, LearnError> {
        if support_vectors.len() != coefficients.len() {
            return Err(LearnError::DimensionMismatch {
                expected: support_vectors.len(),
                got: coefficients.len(),
            });
        }
        let dimension = support_vectors.first().map_or(0, Vec::len);
        if let Some(bad) = support_vectors.iter().find(|s| s.len() != dimension) {
            return Err(LearnError::DimensionMismatch {
                expected: dimension,
                got: bad.len(),
            });
        }
        Ok(Self {
            dimension,
            support_vectors: support_vectors.into_iter().flatten().collect(),
            coefficients,
            bias,
            gamma,
        })
    }

    pub(crate) fn from_parts(
        dimension: usize,
        support_vectors: Vec<f64>,
        coefficients: Vec<f64>,
        bias: f64,
        gamma: f64,
    ) -> Result<Self, LearnError> {
        if support_vectors.len() != dimension * coefficients.len() {
            return Err(LearnError::CorruptModel(format!(
                "{} support values for {} vectors of dimension {dimension}",
                support_vectors.len(),
                coefficients.len()
            )));
        }
        Ok(Self {
            dimension,
            support_vectors,
            coefficients,
            bias,
            gamma,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn support_count(&self) -> usize {
        self.coefficients.len()
    }

    pub fn support_vector(&self, i: usize) -> &[f64] {
        &self.support_vectors[i * self.dimension..(i + 1) * self.dimension]
    }

    pub(crate) fn flat_support_vectors(&self) -> &[f64] {
        &self.support_vectors
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn decision_value(&self, x: &[f64]) -> Result<f64, LearnError> {
        if x.len() != self.dimension {
            return Err(LearnError::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        let sum: f64 = self
            .support_vectors
            .chunks_exact(self.dimension.max(1))
            .zip(&self.coefficients)
            .map(|(s, w)| w * rbf_kernel(s, x, self.gamma))
            .sum();
        Ok(sum + self.bias)
    }
}

/// LRU-ish store of kernel rows `K(x_i, .)`.
struct KernelCache<'a> {
    x: &'a [Vec<f64>],
    gamma: f64,
    rows: HashMap<usize, Rc<Vec<f64>>>,
    order: VecDeque<usize>,
    capacity: usize,
    evaluations: u64,
}

impl<'a> KernelCache<'a> {
    fn new(x: &'a [Vec<f64>], gamma: f64, cache_bytes: usize) -> Self {
        let row_bytes = x.len().max(1) * std::mem::size_of::<f64>();
        Self {
            x,
            gamma,
            rows: HashMap::new(),
            order: VecDeque::new(),
            capacity: (cache_bytes / row_bytes).max(2),
            evaluations: 0,
        }
    }

    fn row(&mut self, i: usize) -> Rc<Vec<f64>> {
        if let Some(r) = self.rows.get(&i) {
            return Rc::clone(r);
        }
        let xi = &self.x[i];
        let row: Vec<f64> = self.x.iter().map(|xj| rbf_kernel(xi, xj, self.gamma)).collect();
        self.evaluations += row.len() as u64;
        if self.rows.len() >= self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.rows.remove(&old);
            }
        }
        let row = Rc::new(row);
        self.rows.insert(i, Rc::clone(&row));
        self.order.push_back(i);
        row
    }
}

/// Trains a soft-margin RBF SVM by sequential minimal optimization with
/// maximal-violating-pair working set selection.
///
/// Labels must be +1 or -1. Internally the problem is always posed with the
/// first sample's label as +1, so flipping every label yields exactly the
/// negated decision function.
pub fn train_svm(
    x: &[Vec<f64>],
    labels: &[f64],
    params: &SvmHyperParams,
    options: &SmoOptions,
) -> Result<(SvmModel, TrainReport), LearnError> {
    params.validate()?;
    if x.len() != labels.len() {
        return Err(LearnError::DimensionMismatch {
            expected: x.len(),
            got: labels.len(),
        });
    }
    if x.len() < 2 {
        return Err(LearnError::TooFewSamples {
            got: x.len(),
            required: 2,
        });
    }
    let dim = x[0].len();
    if let Some(bad) = x.iter().find(|r| r.len() != dim) {
        return Err(LearnError::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(LearnError::NonFinite);
    }
    if let Some(&bad) = labels.iter().find(|&&l| l != 1.0 && l != -1.0) {
        return Err(LearnError::InvalidLabel(bad));
    }
    if labels.iter().all(|&l| l == labels[0]) {
        return Err(LearnError::SingleClass);
    }

    let orientation = labels[0];
    let y: Vec<f64> = labels.iter().map(|l| l * orientation).collect();
    let n = x.len();
    let c = params.c;
    let max_iter = if options.max_iterations == 0 {
        (10_000_000u64).max(100 * n as u64)
    } else {
        options.max_iterations
    };

    let mut cache = KernelCache::new(x, params.gamma, options.cache_bytes);
    let mut alpha = vec![0.0; n];
    // gradient of the dual objective 1/2 a'Qa - e'a
    let mut grad = vec![-1.0; n];
    let mut iterations = 0u64;
    let mut gap;

    loop {
        let (i, j, g) = select_working_set(&y, &alpha, &grad, c);
        gap = g;
        if gap < params.eps {
            break;
        }
        if iterations >= max_iter || cache.evaluations >= options.max_kernel_evaluations {
            return Err(LearnError::ConvergenceFailure {
                iterations,
                kernel_evaluations: cache.evaluations,
                gap,
            });
        }
        iterations += 1;

        let ki = cache.row(i);
        let kj = cache.row(j);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let qij = y[i] * y[j] * ki[j];
        let (qii, qjj) = (ki[i], kj[j]);

        if y[i] != y[j] {
            let quad = positive(qii + qjj + 2.0 * qij);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = positive(qii + qjj - 2.0 * qij);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let di = alpha[i] - old_i;
        let dj = alpha[j] - old_j;
        for k in 0..n {
            grad[k] += y[k] * (y[i] * ki[k] * di + y[j] * kj[k] * dj);
        }
    }

    let rho = compute_rho(&y, &alpha, &grad, c);
    let mut svs = Vec::new();
    let mut coefficients = Vec::new();
    let mut bounded = 0;
    for k in 0..n {
        if alpha[k] > 0.0 {
            svs.push(x[k].clone());
            coefficients.push(orientation * alpha[k] * y[k]);
            if alpha[k] >= c {
                bounded += 1;
            }
        }
    }
    let report = TrainReport {
        iterations,
        kernel_evaluations: cache.evaluations,
        kkt_gap: gap,
        support_vectors: svs.len(),
        bounded_support_vectors: bounded,
        alphas: alpha,
    };
    let model = SvmModel::new(svs, coefficients, -orientation * rho, params.gamma)?;
    Ok((model, report))
}

fn positive(q: f64) -> f64 {
    if q > 0.0 {
        q
    } else {
        1e-12
    }
}

/// Returns the maximal violating pair and the violation `m(a) - M(a)`.
fn select_working_set(y: &[f64], alpha: &[f64], grad: &[f64], c: f64) -> (usize, usize, f64) {
    let mut gmax = f64::NEG_INFINITY;
    let mut gmax2 = f64::NEG_INFINITY;
    let (mut i, mut j) = (0, 0);
    for t in 0..y.len() {
        let up = if y[t] > 0.0 { alpha[t] < c } else { alpha[t] > 0.0 };
        let low = if y[t] > 0.0 { alpha[t] > 0.0 } else { alpha[t] < c };
        let v = -y[t] * grad[t];
        if up && v > gmax {
            gmax = v;
            i = t;
        }
        if low && -v > gmax2 {
            gmax2 = -v;
            j = t;
        }
    }
    (i, j, gmax + gmax2)
}

/// Offset of the decision function: the mean of `y_i G_i` over free
/// variables, or the middle of the feasible interval when none are free.
fn compute_rho(y: &[f64], alpha: &[f64], grad: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut free = 0usize;
    for t in 0..y.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum += yg;
        }
    }
    if free > 0 {
        sum / free as f64
    } else {
        (ub + lb) / 2.0
    }
}
