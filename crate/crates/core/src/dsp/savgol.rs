use super::DspError;

/// Convolution filter `y_t = (1/h) * sum_i a_i * x_{t+i}` with `i` running
/// over `-(n-1)/2 ..= (n-1)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SavitzkyGolayFilter {
    coefficients: Vec<f64>,
    norm: f64,
}

impl SavitzkyGolayFilter {
    /// 7-point first-derivative filter (quadratic fit).
    pub fn first_derivative() -> Self {
        Self {
            coefficients: vec![-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0],
            norm: 28.0,
        }
    }

    /// 7-point second-derivative filter (quadratic/cubic fit).
    pub fn second_derivative() -> Self {
        Self {
            coefficients: vec![5.0, 0.0, -3.0, -4.0, -3.0, 0.0, 5.0],
            norm: 42.0,
        }
    }

    pub fn new(coefficients: Vec<f64>, norm: f64) -> Result<Self, DspError> {
        if coefficients.len() % 2 == 0 {
            return Err(DspError::InvalidFilter(format!(
                "filter length {} is not odd",
                coefficients.len()
            )));
        }
        if norm == 0.0 || !norm.is_finite() {
            return Err(DspError::InvalidFilter(format!("normalisation {norm}")));
        }
        Ok(Self { coefficients, norm })
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn half_width(&self) -> usize {
        self.coefficients.len() / 2
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }
}

/// Filter output at position `t`; neighbours outside the series are replaced
/// by the nearest edge sample.
pub fn savitzky_golay_at(series: &[f64], t: usize, filter: &SavitzkyGolayFilter) -> f64 {
    let half = filter.half_width() as isize;
    let last = series.len() as isize - 1;
    let acc: f64 = filter
        .coefficients
        .iter()
        .enumerate()
        .map(|(j, a)| {
            let idx = (t as isize + j as isize - half).clamp(0, last);
            a * series[idx as usize]
        })
        .sum();
    acc / filter.norm
}

/// Filters a whole series, preserving its length.
pub fn savitzky_golay(series: &[f64], filter: &SavitzkyGolayFilter) -> Result<Vec<f64>, DspError> {
    if series.len() < filter.len() {
        return Err(DspError::SeriesTooShort {
            len: series.len(),
            required: filter.len(),
        });
    }
    Ok((0..series.len())
        .map(|t| savitzky_golay_at(series, t, filter))
        .collect())
}
