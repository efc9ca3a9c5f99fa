use nalgebra::DMatrix;

pub use nalgebra::Complex;

use super::DspError;

const RESIDUAL_TOL: f64 = 1e-6;
const POLISH_STEPS: usize = 8;

/// Horner evaluation of `p(z)` and `p'(z)` for descending coefficients.
fn eval_with_derivative(coeffs: &[f64], z: Complex<f64>) -> (Complex<f64>, Complex<f64>) {
    let mut p = Complex::new(coeffs[0], 0.0);
    let mut dp = Complex::new(0.0, 0.0);
    for &c in &coeffs[1..] {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// `|p(z)|` divided by `sum |a_i| max(1, |z|)^(n-i)`, the scale of the
/// polynomial's terms at `z`.
fn relative_residual(coeffs: &[f64], z: Complex<f64>) -> f64 {
    let (p, _) = eval_with_derivative(coeffs, z);
    let r = z.norm().max(1.0);
    let scale = coeffs
        .iter()
        .fold(0.0, |acc, c| acc * r + c.abs())
        .max(f64::MIN_POSITIVE);
    p.norm() / scale
}

/// Diagonal similarity scaling (Parlett-Reinsch) to improve eigenvalue
/// accuracy of companion matrices.
fn balance(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let radix = 2.0f64;
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= radix * radix;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= radix * radix;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// All complex roots of the polynomial with descending coefficients
/// `coeffs[0] z^n + ... + coeffs[n]`.
///
/// Roots come from the eigenvalues of the balanced companion matrix and are
/// then polished with Newton steps on the original polynomial.
pub fn polynomial_roots(coeffs: &[f64]) -> Result<Vec<Complex<f64>>, DspError> {
    if coeffs.len() < 2 {
        return Err(DspError::InvalidPolynomial("degree must be at least 1".into()));
    }
    if coeffs[0] == 0.0 {
        return Err(DspError::InvalidPolynomial("leading coefficient is zero".into()));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(DspError::InvalidPolynomial("non-finite coefficient".into()));
    }
    let n = coeffs.len() - 1;
    if n == 1 {
        return Ok(vec![Complex::new(-coeffs[1] / coeffs[0], 0.0)]);
    }

    let mut companion = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        companion[(0, j)] = -coeffs[j + 1] / coeffs[0];
    }
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    balance(&mut companion);

    let mut roots: Vec<Complex<f64>> = companion.complex_eigenvalues().iter().copied().collect();
    let mut worst: f64 = 0.0;
    for root in &mut roots {
        let mut best = *root;
        let mut best_res = relative_residual(coeffs, best);
        let mut z = best;
        for _ in 0..POLISH_STEPS {
            if best_res == 0.0 {
                break;
            }
            let (p, dp) = eval_with_derivative(coeffs, z);
            if dp.norm() == 0.0 {
                break;
            }
            z -= p / dp;
            let res = relative_residual(coeffs, z);
            if !res.is_finite() {
                break;
            }
            if res < best_res {
                best = z;
                best_res = res;
            }
        }
        *root = best;
        worst = worst.max(best_res);
    }
    if !(worst < RESIDUAL_TOL) {
        return Err(DspError::NumericalFailure { residual: worst });
    }
    Ok(roots)
}
